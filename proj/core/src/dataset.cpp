#include "fedsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& cell, long long row, long long column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw CsvParseError(row, column, "cell '" + cell + "' is not a plain decimal number");
  }
  if (!std::isfinite(v)) {
    throw CsvParseError(row, column, "cell '" + cell + "' is not finite");
  }
  return v;
}

// Group row positions by label, ascending label order. Positions stay sorted.
std::vector<std::vector<std::size_t>> positions_by_label(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> groups(2);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    groups[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }
  return groups;
}

}  // namespace

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void Dataset::append_row(std::span<const double> features, int label, std::int64_t row_id) {
  if (features.size() != n_features()) {
    raise(ErrorCode::dimension_mismatch,
          "row has " + std::to_string(features.size()) + " features, dataset has " +
              std::to_string(n_features()));
  }
  values.insert(values.end(), features.begin(), features.end());
  labels.push_back(label);
  row_ids.push_back(row_id);
}

Dataset Dataset::take(std::span<const std::size_t> positions) const {
  Dataset out;
  out.feature_names = feature_names;
  out.values.reserve(positions.size() * n_features());
  out.labels.reserve(positions.size());
  out.row_ids.reserve(positions.size());
  for (std::size_t pos : positions) {
    auto r = row(pos);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.labels.push_back(labels[pos]);
    out.row_ids.push_back(row_ids[pos]);
  }
  return out;
}

const std::vector<std::string>& pima_schema() {
  static const std::vector<std::string> schema = {
      "Pregnancies",   "Glucose", "BloodPressure",
      "SkinThickness", "Insulin", "BMI",
      "DiabetesPedigreeFunction", "Age", "Outcome"};
  return schema;
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
  if (schema.size() < 2) raise(ErrorCode::invalid_config, "schema needs >= 1 feature + label");

  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::missing_file, "cannot open '" + path.string() + "'");

  auto read_line = [&](std::string& line) -> bool {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  std::string header;
  if (!read_line(header)) {
    raise(ErrorCode::schema_mismatch, "'" + path.string() + "' has no header line");
  }
  auto names = split_cells(header);
  if (names.size() != schema.size()) {
    raise(ErrorCode::schema_mismatch,
          "expected " + std::to_string(schema.size()) + " columns, header has " +
              std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (names[i] != schema[i]) {
      raise(ErrorCode::schema_mismatch, "column " + std::to_string(i + 1) + " is '" + names[i] +
                                            "', expected '" + schema[i] + "'");
    }
  }

  Dataset ds;
  ds.feature_names.assign(schema.begin(), schema.end() - 1);
  const std::size_t d = ds.feature_names.size();
  const long long label_column = static_cast<long long>(schema.size());

  std::string line;
  long long row = 0;
  std::vector<double> features(d);
  while (read_line(line)) {
    ++row;
    if (line.empty()) throw CsvParseError(row, 1, "blank line");
    auto cells = split_cells(line);
    if (cells.size() != schema.size()) {
      throw CsvParseError(row, static_cast<long long>(cells.size()) + 1,
                          "expected " + std::to_string(schema.size()) + " cells, found " +
                              std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      features[c] = parse_cell(cells[c], row, static_cast<long long>(c) + 1);
    }
    double label_value = parse_cell(cells[d], row, label_column);
    if (label_value != 0.0 && label_value != 1.0) {
      throw CsvParseError(row, label_column,
                          "label '" + cells[d] + "' must be exactly 0 or 1");
    }
    ds.append_row(features, static_cast<int>(label_value), row - 1);
  }

  if (ds.n_rows() == 0) {
    raise(ErrorCode::empty_data, "'" + path.string() + "' has a header but no data rows");
  }
  return ds;
}

std::pair<Dataset, Dataset> stratified_holdout(const Dataset& ds, double test_fraction,
                                               std::uint64_t seed) {
  if (!(test_fraction >= 0.0) || test_fraction >= 1.0) {
    raise(ErrorCode::invalid_config, "test_fraction must lie in [0, 1)");
  }
  if (ds.n_rows() == 0) raise(ErrorCode::empty_data, "cannot split an empty dataset");

  std::vector<char> in_test(ds.n_rows(), 0);
  auto groups = positions_by_label(ds);
  for (int label = 0; label <= 1; ++label) {
    auto& positions = groups[static_cast<std::size_t>(label)];
    if (positions.empty()) continue;
    auto take = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(positions.size())));
    if (test_fraction > 0.0 && take == 0) {
      raise(ErrorCode::degenerate_split,
            "class " + std::to_string(label) + " with " + std::to_string(positions.size()) +
                " rows contributes no test rows at fraction " + std::to_string(test_fraction));
    }
    RngStream rng = RngStream::derive(seed, "holdout", static_cast<std::uint64_t>(label));
    rng.shuffle(positions);
    for (std::size_t i = 0; i < take; ++i) in_test[positions[i]] = 1;
  }

  std::vector<std::size_t> train_pos;
  std::vector<std::size_t> test_pos;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    (in_test[i] ? test_pos : train_pos).push_back(i);
  }
  return {ds.take(train_pos), ds.take(test_pos)};
}

std::vector<ClientPartition> partition_clients(const Dataset& train, int k, std::uint64_t seed) {
  if (k < 1) raise(ErrorCode::invalid_config, "client count must be >= 1");
  for (int label = 0; label <= 1; ++label) {
    std::size_t count = train.count_label(label);
    if (count > 0 && count < static_cast<std::size_t>(k)) {
      raise(ErrorCode::too_few_rows, "class " + std::to_string(label) + " has " +
                                         std::to_string(count) + " rows, need >= " +
                                         std::to_string(k));
    }
  }
  if (train.n_rows() == 0) raise(ErrorCode::empty_data, "cannot partition an empty dataset");

  std::vector<std::vector<std::size_t>> assigned(static_cast<std::size_t>(k));
  std::size_t cursor = 0;  // carries across classes so sizes differ by <= 1
  auto groups = positions_by_label(train);
  for (int label = 0; label <= 1; ++label) {
    auto& positions = groups[static_cast<std::size_t>(label)];
    if (positions.empty()) continue;
    RngStream rng = RngStream::derive(seed, "partition", static_cast<std::uint64_t>(label));
    rng.shuffle(positions);
    for (std::size_t pos : positions) {
      assigned[cursor % static_cast<std::size_t>(k)].push_back(pos);
      ++cursor;
    }
  }

  std::vector<ClientPartition> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    auto& positions = assigned[static_cast<std::size_t>(c)];
    std::sort(positions.begin(), positions.end());
    out.push_back({c, train.take(positions)});
  }
  return out;
}

}  // namespace fedsim
