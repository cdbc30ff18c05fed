#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "pfedsop/models/batch.hpp"
#include "pfedsop/numkit/rng.hpp"

namespace pfedsop::data {

using models::Batch;
using models::Matrix;

struct LabeledDataset {
  Matrix samples;  // N x input_dim
  std::vector<int> labels;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t input_dim() const noexcept { return samples.cols; }

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// Throws DataError unless labels are in range and N >= 1.
void validate(const LabeledDataset& ds);

/// Copies the listed rows into a batch, in the given order.
Batch gather(const LabeledDataset& ds, std::span<const std::size_t> indices);

struct SynthesisParams {
  std::size_t num_classes = 10;
  std::size_t input_dim = 20;
  std::size_t samples_per_class = 200;
  double class_separation = 2.0;
};

/// Isotropic unit-variance Gaussian blob per class. Class means are drawn
/// uniformly on the sphere of radius `class_separation`. Samples are stored
/// class by class.
LabeledDataset synthesize_classification(const SynthesisParams& params, numkit::RngStream& rng);

/// Reads `label,f1,...,fD` rows. A first line whose first cell is not a
/// number is treated as a header. class_count = max label + 1. Throws
/// FormatError naming the 1-based line on ragged rows, bad cells, or an
/// empty file.
LabeledDataset load_csv(const std::filesystem::path& path);
LabeledDataset parse_csv(std::string_view text);

}  // namespace pfedsop::data
