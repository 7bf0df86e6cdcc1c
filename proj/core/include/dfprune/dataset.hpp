#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dfprune {

/// Row-major sample matrix with integer class labels.
struct LabeledDataset {
  std::size_t n_samples = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::vector<float> samples;
  std::vector<std::uint32_t> labels;

  std::span<const float> sample(std::size_t i) const {
    return {samples.data() + i * n_features, n_features};
  }
};

void validate(const LabeledDataset& ds);

/// Binary NNDS format: "NNDS", u32 version, u32 n_samples, u32 n_features,
/// u32 n_classes, f32 samples (row-major), u32 labels. Little-endian.
LabeledDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

}  // namespace dfprune
