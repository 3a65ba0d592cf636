#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pgig/network.hpp"
#include "pgig/patterns.hpp"
#include "pgig/random.hpp"
#include "pgig/tensor.hpp"

namespace pgig::train {

/// Synthetic 4-class image task: horizontal bar, vertical bar, cross, diagonal.
///
/// image = amplitude · template + shared · ramp + pixel noise, clipped to [−1, 1]
///
/// amplitude ~ U[min_amplitude, 1], shared ~ N(0, shared_noise_sigma²) once per
/// image, the ramp runs −1 → 1 left to right, pixel noise ~ N(0, pixel_noise_sigma²).
struct TaskConfig {
  std::size_t side = 16;
  std::size_t train_size = 2000;
  std::size_t val_size = 500;
  std::size_t test_size = 500;
  double min_amplitude = 0.5;
  double shared_noise_sigma = 0.5;
  double pixel_noise_sigma = 0.15;
  std::uint64_t seed = 1;

  static constexpr std::size_t kClasses = 4;

  /// Templates only: amplitude 1, no distractor, no pixel noise.
  static TaskConfig noiseless();
  void validate() const;
};

struct Split {
  std::vector<Tensor> images;
  std::vector<std::size_t> labels;

  std::size_t size() const { return images.size(); }
};

struct SyntheticTask {
  TaskConfig config;
  std::vector<Tensor> templates;
  Tensor distractor_direction;
  Split train;
  Split val;
  Split test;
};

/// Binary (0/1) class templates of side × side pixels.
std::vector<Tensor> class_templates(std::size_t side);
Tensor distractor_direction(std::size_t side);

/// Labels cycle 0,1,2,3 so every split is class balanced.
SyntheticTask generate_task(const TaskConfig& cfg, RandomSource& rng);

struct TrainConfig {
  std::vector<std::size_t> hidden{64, 32};
  double learning_rate = 0.05;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  Network network;  ///< best validation accuracy; ties go to the later epoch
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::vector<EpochStats> history;
};

/// Dense ReLU stack with a linear softmax head. Weights ~ U[−r, r] with
/// r = sqrt(6 / (fan_in + fan_out)), drawn layer by layer in row-major order;
/// biases start at zero.
Network initialize_network(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t classes,
                           RandomSource& rng);

/// Minibatch SGD on softmax cross-entropy. Single threaded and fully seeded.
/// Throws TrainingError when the loss stops being finite.
TrainResult train(const SyntheticTask& task, const TrainConfig& cfg);

double accuracy(const Network& net, const Split& split);

struct FitResult {
  Network network;
  PatternSet patterns;
  std::size_t invalid_neurons = 0;
};

/// Estimates patterns over `data` (normally the training split) and attaches them.
FitResult fit_patterns(const Network& net, std::span<const Tensor> data, const PatternOptions& options = {});

/// CSV with header label,p0,p1,… one image per row.
void write_split(const std::filesystem::path& path, const Split& split);
Split read_split(const std::filesystem::path& path);

}  // namespace pgig::train
