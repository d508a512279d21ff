#pragma once

#include <cstddef>
#include <vector>

namespace skelact {

// Frame-major (time x channel) block of features fed to the classifier.
struct SequenceFeatureTensor {
  std::size_t frames = 0;
  std::size_t channels = 0;
  std::vector<double> values;
  int layout_version = 0;

  SequenceFeatureTensor() = default;
  SequenceFeatureTensor(std::size_t n, std::size_t c, int version = 0)
      : frames(n), channels(c), values(n * c, 0.0), layout_version(version) {}

  double& at(std::size_t t, std::size_t c) { return values[t * channels + c]; }
  double at(std::size_t t, std::size_t c) const { return values[t * channels + c]; }
  double* row(std::size_t t) { return values.data() + t * channels; }
  const double* row(std::size_t t) const { return values.data() + t * channels; }
};

struct LabeledTensor {
  SequenceFeatureTensor tensor;
  int label = 0;
};

}  // namespace skelact
