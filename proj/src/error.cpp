#include "mql/error.hpp"

#include <array>
#include <cstdio>

namespace mql {

namespace {

constexpr std::array kNames = {
    "IoError",          "FormatError",         "UnknownColumn",
    "DuplicateColumn",  "TypeMismatch",        "EmptyColumn",
    "LexError",         "ParseError",          "ExclusivityError",
    "RangeError",       "NotNumeric",          "TooFewValues",
    "DomainError",      "TrainTooLarge",       "DegenerateDesign",
    "KTooLarge",        "KExceedsRows",        "SchemaMismatch",
    "EmptyTestSet",     "NameCollision",       "UnknownModel",
    "CorruptManifest",  "UnknownTable",        "UnknownAlgorithm",
    "UnknownLabels",    "AmbiguousTarget",     "TargetInFeatures",
    "DatatypeFail",     "SupervisionMismatch", "AccuracyBelowThreshold",
    "BestBelowThreshold", "EmptyResult",       "MissingActuals",
    "TooFewFeatures",   "UnsupportedForEmission", "MissingInput",
    "Usage",            "Unsupported",
};

static_assert(kNames.size() == static_cast<std::size_t>(ErrorCode::Unsupported) + 1);

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  return kNames[static_cast<std::size_t>(code)];
}

std::string error_code_id(ErrorCode code) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "MQL-%03d", static_cast<int>(code) + 1);
  return buf;
}

}  // namespace mql
