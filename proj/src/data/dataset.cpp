#include "pfedsop/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pfedsop/error.hpp"

namespace pfedsop::data {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

bool parse_label(std::string_view cell, int& out) {
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && out >= 0;
}

}  // namespace

void validate(const LabeledDataset& ds) {
  if (ds.size() == 0) throw DataError("dataset is empty");
  if (ds.samples.rows != ds.labels.size()) throw DataError("dataset rows/labels mismatch");
  for (int label : ds.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= ds.class_count) {
      throw DataError("label " + std::to_string(label) + " outside [0, " +
                      std::to_string(ds.class_count) + ")");
    }
  }
}

Batch gather(const LabeledDataset& ds, std::span<const std::size_t> indices) {
  Batch batch;
  batch.inputs = Matrix(indices.size(), ds.input_dim());
  batch.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = ds.samples.row(indices[i]);
    std::copy(src.begin(), src.end(), batch.inputs.row(i).begin());
    batch.labels[i] = ds.labels[indices[i]];
  }
  return batch;
}

LabeledDataset synthesize_classification(const SynthesisParams& params, numkit::RngStream& rng) {
  if (params.num_classes < 1 || params.input_dim < 1 || params.samples_per_class < 1) {
    throw ParameterError("synthesize_classification: counts must be >= 1");
  }
  if (!(params.class_separation >= 0.0) || !std::isfinite(params.class_separation)) {
    throw ParameterError("synthesize_classification: class_separation must be finite and >= 0");
  }
  const std::size_t d = params.input_dim;
  Matrix means(params.num_classes, d);
  for (std::size_t c = 0; c < params.num_classes; ++c) {
    auto mean = means.row(c);
    double norm_sq = 0.0;
    do {
      norm_sq = 0.0;
      for (auto& v : mean) {
        v = rng.normal();
        norm_sq += v * v;
      }
    } while (norm_sq == 0.0);
    const double factor = params.class_separation / std::sqrt(norm_sq);
    for (auto& v : mean) v *= factor;
  }

  LabeledDataset ds;
  ds.class_count = params.num_classes;
  const std::size_t n = params.num_classes * params.samples_per_class;
  ds.samples = Matrix(n, d);
  ds.labels.resize(n);
  std::size_t row = 0;
  for (std::size_t c = 0; c < params.num_classes; ++c) {
    for (std::size_t s = 0; s < params.samples_per_class; ++s, ++row) {
      auto x = ds.samples.row(row);
      const auto mean = means.row(c);
      for (std::size_t j = 0; j < d; ++j) x[j] = mean[j] + rng.normal();
      ds.labels[row] = static_cast<int>(c);
    }
  }
  return ds;
}

LabeledDataset parse_csv(std::string_view text) {
  LabeledDataset ds;
  std::vector<double> values;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::size_t last_line = 0;
  bool first_content_line = true;
  int max_label = -1;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    last_line = line_no;

    const auto cells = split_cells(line);
    double probe = 0.0;
    if (first_content_line && !parse_double(cells.front(), probe)) {
      first_content_line = false;
      continue;  // header
    }
    first_content_line = false;

    if (cells.size() < 2) throw FormatError("expected label and at least one feature", line_no);
    if (width == 0) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw FormatError("expected " + std::to_string(width) + " fields, found " +
                            std::to_string(cells.size()),
                        line_no);
    }
    int label = 0;
    if (!parse_label(cells[0], label)) {
      throw FormatError("unparsable label '" + std::string(cells[0]) + "'", line_no);
    }
    for (std::size_t j = 1; j < cells.size(); ++j) {
      double v = 0.0;
      if (!parse_double(cells[j], v) || !std::isfinite(v)) {
        throw FormatError("unparsable feature '" + std::string(cells[j]) + "'", line_no);
      }
      values.push_back(v);
    }
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (ds.labels.empty()) throw FormatError("no data rows", std::max<std::size_t>(last_line, 1));

  ds.samples.rows = ds.labels.size();
  ds.samples.cols = width - 1;
  ds.samples.data = std::move(values);
  ds.class_count = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

}  // namespace pfedsop::data
