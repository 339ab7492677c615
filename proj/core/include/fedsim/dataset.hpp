#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fedsim {

// Row-major feature matrix with binary labels. Every row carries a stable id
// assigned at load time, so disjointness and full coverage of splits can be
// audited after shuffling.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> values;  // n_rows x n_features
  std::vector<int> labels;     // each exactly 0 or 1
  std::vector<std::int64_t> row_ids;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return feature_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span(values).subspan(i * n_features(), n_features());
  }

  std::size_t count_label(int label) const;

  void append_row(std::span<const double> features, int label, std::int64_t row_id);

  // Subset in the order given by `positions` (indices into this dataset).
  Dataset take(std::span<const std::size_t> positions) const;
};

struct ClientPartition {
  int client_id = 0;
  Dataset data;
};

// Column names of the Pima diabetes CSV: eight numeric features followed by
// the binary "Outcome" label.
const std::vector<std::string>& pima_schema();

// Strict CSV reader. The header must match `schema` exactly; every cell must
// parse as a finite real (plain decimal or scientific, '.' decimal point, no
// quoting); the final column is the label and must be exactly 0 or 1.
Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema);

// Class-stratified train/test split: each class contributes
// floor(test_fraction * class_count) rows to the test side, chosen by a
// seed-derived shuffle. Both outputs preserve the original row order.
std::pair<Dataset, Dataset> stratified_holdout(const Dataset& ds, double test_fraction,
                                               std::uint64_t seed);

// Deals rows to k clients round-robin after a per-class shuffle, processing
// classes in ascending label order with the deal cursor carried from one
// class to the next. Client sizes therefore differ by at most one, and each
// class spreads as evenly as arithmetic allows.
std::vector<ClientPartition> partition_clients(const Dataset& train, int k, std::uint64_t seed);

}  // namespace fedsim
