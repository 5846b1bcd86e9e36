#pragma once

#include <string>
#include <vector>

#include "mql/learn.hpp"
#include "mql/table.hpp"

namespace mql {

// Labeled outputs of a GENERATE statement.
struct ResultSet {
  MlType ml_type = MlType::Pred;
  std::string target_name;          // target column, class column, or "cluster"
  std::vector<Column> labels;       // LABEL columns, one cell per output
  std::vector<Cell> outputs;        // prediction / class label / cluster id
  std::optional<std::vector<Cell>> actuals;
  std::vector<std::string> feature_names;
  Matrix features;                  // raw feature rows backing the outputs
  std::vector<std::vector<double>> centroids;  // clustering only, raw units
  std::size_t source_statement = 0;

  std::size_t size() const { return outputs.size(); }
  // "prediction", "class" or "cluster".
  std::string output_column() const;
};

// Predicts every row of `rows`; actuals are attached when the model's target
// column is present in `rows`.
ResultSet predict(const Model& m, const Table& rows);

// Columns: labels..., output column, `actual` when available.
Table to_table(const ResultSet& r);

}  // namespace mql
