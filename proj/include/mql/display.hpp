#pragma once

#include <string>

#include "mql/result.hpp"
#include "mql/table.hpp"

namespace mql {

// SVG documents with fixed geometry; identical inputs give identical bytes.

// One bar per output row labeled by the LABEL columns (1..n without them).
// Throws EmptyResult.
std::string render_bar(const ResultSet& r);

// (actual, predicted) points with the y = x reference line. Throws
// EmptyResult or MissingActuals.
std::string render_scatter(const ResultSet& r);

// First two features colored by cluster, centroids as crosses. Throws
// EmptyResult or TooFewFeatures.
std::string render_clusters(const ResultSet& r);

// Bar per class label counting predicted rows. Throws EmptyResult.
std::string render_class_counts(const ResultSet& r);

// Fixed-width text table with a header row.
std::string render_text_table(const Table& t);

}  // namespace mql
