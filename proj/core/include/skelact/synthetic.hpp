#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skelact/dataset.hpp"
#include "skelact/skeleton.hpp"

namespace skelact {

struct SynthConfig {
  std::size_t num_classes = 5;
  std::size_t sequences_per_class = 40;
  std::size_t min_frames = 40;
  std::size_t max_frames = 64;
  std::string topology = "utkinect20";
  // Standard deviation of the white positional noise, in topology units.
  double noise = 0.01;
  std::uint64_t seed = 0;
  // Confine the class motion to the first third and idle for the rest.
  bool long_action = false;
  double amplitude = 0.2;
  // Per-sequence rotation about the vertical axis is drawn from +-this.
  double max_yaw_degrees = 30.0;
  double train_fraction = 0.5;
};

void validate_synth_config(const SynthConfig& config);

// Neutral standing pose used as the base for synthetic motion.
std::vector<Vec3> rest_pose(const Topology& topology);

// Joints moved by class `c`: an end joint and up to two ancestors, with weights.
struct LimbChain {
  std::vector<JointIndex> joints;
  std::vector<double> weights;
};
LimbChain class_chain(const Topology& topology, std::size_t class_index);

// Class motion envelope at frame t of a K-frame sequence; 1 everywhere unless
// long_action, where it tapers to 0 at K/3.
double motion_envelope(std::size_t t, std::size_t frames, bool long_action);

Dataset generate_synthetic(const SynthConfig& config);

}  // namespace skelact
