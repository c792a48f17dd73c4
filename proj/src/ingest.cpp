#include "riklr/error.hpp"
#include "riklr/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace riklr {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"'");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"'");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  if (delimiter == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) fields.push_back(trim(tok));
    return fields;
  }
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool parse_number(const std::string& text, double& out) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

struct RawTable {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

RawTable parse_table(std::istream& is, const CsvOptions& options, bool with_labels) {
  RawTable table;
  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  std::size_t label_col = 0;
  bool first = true;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    if (first && options.header) {
      first = false;
      continue;
    }
    const auto fields = split_fields(line, options.delimiter);
    if (width == 0) {
      width = fields.size();
      if (with_labels) {
        const long idx = options.label_column < 0
                             ? static_cast<long>(width) + options.label_column
                             : static_cast<long>(options.label_column);
        if (idx < 0 || idx >= static_cast<long>(width)) {
          throw config_error("label column " + std::to_string(options.label_column) +
                             " does not exist in a row of " + std::to_string(width) + " fields");
        }
        label_col = static_cast<std::size_t>(idx);
      }
      first = false;
    } else if (fields.size() != width) {
      throw parse_error("expected " + std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()),
                        row, fields.size() + 1);
    }

    std::vector<double> values;
    values.reserve(width);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (with_labels && c == label_col) {
        const std::string& text = fields[c];
        int label = -1;
        if (!options.label_map.empty()) {
          const auto it = options.label_map.find(text);
          if (it == options.label_map.end()) {
            throw input_error("label '" + text + "' at row " + std::to_string(row) +
                              " is not in the label map");
          }
          label = it->second;
          if (label != 0 && label != 1) throw config_error("label map values must be 0 or 1");
        } else {
          double v = 0.0;
          if (!parse_number(text, v)) throw parse_error("non-numeric label '" + text + "'", row, c + 1);
          if (v == 1.0) {
            label = 1;
          } else if (v == 0.0 || v == -1.0) {
            label = 0;
          } else {
            throw input_error("label '" + text + "' at row " + std::to_string(row) +
                              " is not one of 0, 1, -1, +1");
          }
        }
        table.labels.push_back(label);
        continue;
      }
      double v = 0.0;
      if (!parse_number(fields[c], v)) {
        throw parse_error("non-numeric value '" + fields[c] + "'", row, c + 1);
      }
      values.push_back(v);
    }
    table.features.push_back(std::move(values));
  }
  return table;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

Dataset parse_csv(std::istream& is, const CsvOptions& options) {
  const RawTable table = parse_table(is, options, true);
  Dataset data;
  data.features = to_matrix(table.features);
  data.labels = Eigen::Map<const Eigen::VectorXi>(table.labels.data(),
                                                  static_cast<Eigen::Index>(table.labels.size()));
  data.validate();
  return data;
}

Dataset ingest_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot open dataset '" + path + "'");
  return parse_csv(is, options);
}

Eigen::MatrixXd read_features(const std::string& path, const CsvOptions& options) {
  std::ifstream is(path);
  if (!is) throw input_error("cannot open feature file '" + path + "'");
  const RawTable table = parse_table(is, options, false);
  if (table.features.empty()) throw input_error("feature file '" + path + "' has no rows");
  Eigen::MatrixXd m = to_matrix(table.features);
  if (!m.allFinite()) throw input_error("feature file '" + path + "' has non-finite values");
  return m;
}

}  // namespace riklr
