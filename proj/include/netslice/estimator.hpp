#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "netslice/core.hpp"
#include "netslice/dataset.hpp"
#include "netslice/surrogate.hpp"

// The general slice-QoS estimator f(x, z): a small feed-forward network with
// softplus hidden layers and a logistic output, so predictions live in [0,1]
// and stay differentiable everywhere. Besides training (MAE loss, Adam) it
// provides the exact analytic partial derivative of the output with respect
// to the resource input x, which is what the Lagrangian iteration consumes.
//
// A trained model is read-only; forward / input_gradient are pure and safe
// for any number of concurrent callers.

namespace netslice {

struct TrainOptions {
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 64;
  std::uint64_t seed = 1;
};

struct TrainReport {
  std::vector<double> epoch_train_mae;
  double train_mae = 0.0;  // last epoch
  double test_mae = 0.0;   // held-out
  double wall_seconds = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
};

class EstimatorModel final : public SliceQosModel {
 public:
  struct Layer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  // row-major [outputs][inputs]
    std::vector<double> biases;   // [outputs]
  };

  EstimatorModel() = default;

  // Seeded fan-in-scaled uniform initialization. Hidden sizes may be empty,
  // which leaves a plain affine model under the output squashing.
  static EstimatorModel make(int history_depth, std::span<const int> hidden_sizes,
                             std::uint64_t seed);

  int input_width() const { return input_width_; }
  int history_depth() const { return (input_width_ - 3) / 2; }

  // z must have length input_width()-1; non-finite inputs are rejected.
  double forward(double x, std::span<const double> z) const;
  double input_gradient(double x, std::span<const double> z) const;

  // Elementwise identical to calling forward / input_gradient per item.
  void batch_forward_and_grad(std::span<const ObservationVector> inputs,
                              std::span<double> values, std::span<double> gradients) const;

  // Minimizes mean absolute error with Adam. Normalization statistics come
  // from the training set only and are frozen into the model. Deterministic
  // for a fixed seed. Throws if the loss turns non-finite, naming the epoch.
  TrainReport train(std::span<const Sample> train_set, std::span<const Sample> test_set,
                    const TrainOptions& options);

  double mae_on(std::span<const Sample> samples) const;

  void save(const std::filesystem::path& path) const;
  static EstimatorModel load(const std::filesystem::path& path);

  // SliceQosModel
  double value(double x, std::span<const double> z) const override { return forward(x, z); }
  double gradient(double x, std::span<const double> z) const override {
    return input_gradient(x, z);
  }

  // open parameters; tests poke these directly
  std::vector<Layer> layers;
  std::vector<double> norm_shift;  // per input feature
  std::vector<double> norm_scale;
  struct Meta {
    int epochs_trained = 0;
    double train_mae = 0.0;
    double test_mae = 0.0;
    std::uint64_t seed = 0;
  } meta;

 private:
  struct Workspace;
  double forward_impl(double x, std::span<const double> z, Workspace& ws) const;
  double input_gradient_impl(Workspace& ws) const;  // after forward_impl
  void check_input(double x, std::span<const double> z) const;

  int input_width_ = 0;
};

}  // namespace netslice
