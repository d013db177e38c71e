#include "netslice/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "netslice/rng.hpp"

namespace netslice {

namespace {

constexpr int kModelFormatVersion = 1;

double softplus(double a) {
  if (a > 30.0) return a;
  if (a < -30.0) return std::exp(a);
  return std::log1p(std::exp(a));
}

double sigmoid(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

}  // namespace

struct EstimatorModel::Workspace {
  std::vector<std::vector<double>> acts;  // acts[0] = normalized input
  std::vector<std::vector<double>> dact;  // activation slope per layer
  std::vector<double> delta, delta_prev;
};

EstimatorModel EstimatorModel::make(int history_depth, std::span<const int> hidden_sizes,
                                    std::uint64_t seed) {
  if (history_depth < 1) throw std::invalid_argument("history_depth must be >= 1");
  for (int h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");

  EstimatorModel model;
  model.input_width_ = 2 * history_depth + 3;
  model.norm_shift.assign(static_cast<std::size_t>(model.input_width_), 0.0);
  model.norm_scale.assign(static_cast<std::size_t>(model.input_width_), 1.0);
  model.meta.seed = seed;

  std::vector<int> dims;
  dims.push_back(model.input_width_);
  dims.insert(dims.end(), hidden_sizes.begin(), hidden_sizes.end());
  dims.push_back(1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Layer layer;
    layer.inputs = dims[k];
    layer.outputs = dims[k + 1];
    layer.weights.resize(static_cast<std::size_t>(layer.inputs) * layer.outputs);
    layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    Rng rng(derive(seed, Stream::estimator_init, k));
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

void EstimatorModel::check_input(double x, std::span<const double> z) const {
  if (layers.empty()) throw std::logic_error("estimator model is uninitialized");
  if (static_cast<int>(z.size()) != input_width_ - 1)
    throw std::invalid_argument("expected " + std::to_string(input_width_ - 1) +
                                " features, got " + std::to_string(z.size()));
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite resource input");
  for (double v : z)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
}

double EstimatorModel::forward_impl(double x, std::span<const double> z, Workspace& ws) const {
  const std::size_t n_layers = layers.size();
  ws.acts.resize(n_layers + 1);
  ws.dact.resize(n_layers);

  std::vector<double>& input = ws.acts[0];
  input.resize(static_cast<std::size_t>(input_width_));
  input[0] = (x - norm_shift[0]) / norm_scale[0];
  for (std::size_t j = 0; j < z.size(); ++j)
    input[j + 1] = (z[j] - norm_shift[j + 1]) / norm_scale[j + 1];

  for (std::size_t k = 0; k < n_layers; ++k) {
    const Layer& layer = layers[k];
    const std::vector<double>& in = ws.acts[k];
    std::vector<double>& out = ws.acts[k + 1];
    std::vector<double>& slope = ws.dact[k];
    out.resize(static_cast<std::size_t>(layer.outputs));
    slope.resize(static_cast<std::size_t>(layer.outputs));
    const bool last = k + 1 == n_layers;
    for (int o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      double a = layer.biases[static_cast<std::size_t>(o)];
      for (int i = 0; i < layer.inputs; ++i) a += w[i] * in[static_cast<std::size_t>(i)];
      if (last) {
        const double y = sigmoid(a);
        out[static_cast<std::size_t>(o)] = y;
        slope[static_cast<std::size_t>(o)] = y * (1.0 - y);
      } else {
        out[static_cast<std::size_t>(o)] = softplus(a);
        slope[static_cast<std::size_t>(o)] = sigmoid(a);  // softplus' = logistic
      }
    }
  }
  return ws.acts[n_layers][0];
}

double EstimatorModel::input_gradient_impl(Workspace& ws) const {
  // reverse pass down to the input; only the x column is needed but the
  // full per-layer delta is what the training path reuses
  ws.delta = ws.dact.back();
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Layer& layer = layers[k];
    ws.delta_prev.assign(static_cast<std::size_t>(layer.inputs), 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = ws.delta[static_cast<std::size_t>(o)];
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) ws.delta_prev[static_cast<std::size_t>(i)] += w[i] * d;
    }
    if (k > 0) {
      for (int i = 0; i < layer.inputs; ++i)
        ws.delta_prev[static_cast<std::size_t>(i)] *= ws.dact[k - 1][static_cast<std::size_t>(i)];
    }
    std::swap(ws.delta, ws.delta_prev);
  }
  return ws.delta[0] / norm_scale[0];
}

double EstimatorModel::forward(double x, std::span<const double> z) const {
  check_input(x, z);
  Workspace ws;
  return forward_impl(x, z, ws);
}

double EstimatorModel::input_gradient(double x, std::span<const double> z) const {
  check_input(x, z);
  Workspace ws;
  forward_impl(x, z, ws);
  return input_gradient_impl(ws);
}

void EstimatorModel::batch_forward_and_grad(std::span<const ObservationVector> inputs,
                                            std::span<double> values,
                                            std::span<double> gradients) const {
  if (inputs.empty()) throw std::invalid_argument("empty batch");
  if (values.size() != inputs.size() || gradients.size() != inputs.size())
    throw std::invalid_argument("batch output spans must match the input size");
  Workspace ws;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    check_input(inputs[i].x, inputs[i].z);
    values[i] = forward_impl(inputs[i].x, inputs[i].z, ws);
    gradients[i] = input_gradient_impl(ws);
  }
}

double EstimatorModel::mae_on(std::span<const Sample> samples) const {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  Workspace ws;
  double total = 0.0;
  for (const Sample& s : samples) {
    check_input(s.input.x, s.input.z);
    total += std::abs(forward_impl(s.input.x, s.input.z, ws) - s.label);
  }
  return total / static_cast<double>(samples.size());
}

TrainReport EstimatorModel::train(std::span<const Sample> train_set,
                                  std::span<const Sample> test_set,
                                  const TrainOptions& options) {
  if (train_set.empty() || test_set.empty())
    throw std::invalid_argument("train and test sets must be non-empty");
  if (options.epochs < 1 || options.batch_size < 1 || !(options.learning_rate > 0.0))
    throw std::invalid_argument("invalid training options");
  for (const Sample& s : train_set)
    if (static_cast<int>(s.input.width()) != input_width_)
      throw std::invalid_argument("sample width does not match the model input width");

  const auto start_time = std::chrono::steady_clock::now();

  // normalization statistics from the training set only, frozen here
  const std::size_t width = static_cast<std::size_t>(input_width_);
  norm_shift.assign(width, 0.0);
  norm_scale.assign(width, 1.0);
  const double n = static_cast<double>(train_set.size());
  for (const Sample& s : train_set) {
    norm_shift[0] += s.input.x;
    for (std::size_t j = 0; j < s.input.z.size(); ++j) norm_shift[j + 1] += s.input.z[j];
  }
  for (double& m : norm_shift) m /= n;
  std::vector<double> var(width, 0.0);
  for (const Sample& s : train_set) {
    const double dx = s.input.x - norm_shift[0];
    var[0] += dx * dx;
    for (std::size_t j = 0; j < s.input.z.size(); ++j) {
      const double d = s.input.z[j] - norm_shift[j + 1];
      var[j + 1] += d * d;
    }
  }
  for (std::size_t j = 0; j < width; ++j) {
    const double sd = std::sqrt(var[j] / n);
    norm_scale[j] = sd < 1e-12 ? 1.0 : sd;
  }

  // Adam state
  struct Moments {
    std::vector<double> mw, vw, mb, vb;
  };
  std::vector<Moments> moments(layers.size());
  std::vector<Layer> grads(layers.size());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    moments[k].mw.assign(layers[k].weights.size(), 0.0);
    moments[k].vw.assign(layers[k].weights.size(), 0.0);
    moments[k].mb.assign(layers[k].biases.size(), 0.0);
    moments[k].vb.assign(layers[k].biases.size(), 0.0);
    grads[k].weights.resize(layers[k].weights.size());
    grads[k].biases.resize(layers[k].biases.size());
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long adam_step = 0;

  TrainReport report;
  report.seed = options.seed;
  Workspace ws;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng shuffle_rng(derive(options.seed, Stream::estimator_shuffle,
                           static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.uniform_int(0, static_cast<long>(i - 1)));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_abs_err = 0.0;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(options.batch_size));
      const double batch_n = static_cast<double>(batch_end - batch_start);
      for (std::size_t k = 0; k < layers.size(); ++k) {
        std::fill(grads[k].weights.begin(), grads[k].weights.end(), 0.0);
        std::fill(grads[k].biases.begin(), grads[k].biases.end(), 0.0);
      }

      for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
        const Sample& s = train_set[order[bi]];
        const double out = forward_impl(s.input.x, s.input.z, ws);
        const double residual = out - s.label;
        epoch_abs_err += std::abs(residual);
        // MAE subgradient; defined as 0 at zero residual
        const double dloss = residual > 0.0 ? 1.0 : (residual < 0.0 ? -1.0 : 0.0);

        ws.delta.assign(1, dloss * ws.dact.back()[0] / batch_n);
        for (std::size_t k = layers.size(); k-- > 0;) {
          const Layer& layer = layers[k];
          Layer& g = grads[k];
          const std::vector<double>& in = ws.acts[k];
          for (int o = 0; o < layer.outputs; ++o) {
            const double d = ws.delta[static_cast<std::size_t>(o)];
            g.biases[static_cast<std::size_t>(o)] += d;
            double* gw = g.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
            for (int i = 0; i < layer.inputs; ++i) gw[i] += d * in[static_cast<std::size_t>(i)];
          }
          if (k == 0) break;
          ws.delta_prev.assign(static_cast<std::size_t>(layer.inputs), 0.0);
          for (int o = 0; o < layer.outputs; ++o) {
            const double d = ws.delta[static_cast<std::size_t>(o)];
            const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
            for (int i = 0; i < layer.inputs; ++i)
              ws.delta_prev[static_cast<std::size_t>(i)] += w[i] * d;
          }
          for (int i = 0; i < layer.inputs; ++i)
            ws.delta_prev[static_cast<std::size_t>(i)] *=
                ws.dact[k - 1][static_cast<std::size_t>(i)];
          std::swap(ws.delta, ws.delta_prev);
        }
      }

      ++adam_step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step));
      for (std::size_t k = 0; k < layers.size(); ++k) {
        Layer& layer = layers[k];
        Moments& m = moments[k];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
          const double g = grads[k].weights[i];
          m.mw[i] = beta1 * m.mw[i] + (1.0 - beta1) * g;
          m.vw[i] = beta2 * m.vw[i] + (1.0 - beta2) * g * g;
          layer.weights[i] -=
              options.learning_rate * (m.mw[i] / bc1) / (std::sqrt(m.vw[i] / bc2) + eps);
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
          const double g = grads[k].biases[i];
          m.mb[i] = beta1 * m.mb[i] + (1.0 - beta1) * g;
          m.vb[i] = beta2 * m.vb[i] + (1.0 - beta2) * g * g;
          layer.biases[i] -=
              options.learning_rate * (m.mb[i] / bc1) / (std::sqrt(m.vb[i] / bc2) + eps);
        }
      }
    }

    const double epoch_mae = epoch_abs_err / static_cast<double>(train_set.size());
    if (!std::isfinite(epoch_mae))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
    report.epoch_train_mae.push_back(epoch_mae);
  }

  report.epochs = options.epochs;
  report.train_mae = report.epoch_train_mae.back();
  report.test_mae = mae_on(test_set);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();

  meta.epochs_trained = options.epochs;
  meta.train_mae = report.train_mae;
  meta.test_mae = report.test_mae;
  meta.seed = options.seed;
  return report;
}

void EstimatorModel::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["format"] = "netslice-estimator";
  j["version"] = kModelFormatVersion;
  j["input_width"] = input_width_;
  j["hidden_activation"] = "softplus";
  j["output_activation"] = "sigmoid";
  j["norm_shift"] = norm_shift;
  j["norm_scale"] = norm_scale;
  nlohmann::json jl = nlohmann::json::array();
  for (const Layer& layer : layers) {
    nlohmann::json one;
    one["inputs"] = layer.inputs;
    one["outputs"] = layer.outputs;
    one["weights"] = layer.weights;
    one["biases"] = layer.biases;
    jl.push_back(std::move(one));
  }
  j["layers"] = std::move(jl);
  j["meta"] = {{"epochs_trained", meta.epochs_trained},
               {"train_mae", meta.train_mae},
               {"test_mae", meta.test_mae},
               {"seed", meta.seed}};
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << j.dump(1) << '\n';
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

EstimatorModel EstimatorModel::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": unreadable model file: " + e.what());
  }
  if (j.value("format", "") != "netslice-estimator")
    throw std::runtime_error(path.string() + ": not an estimator model file");
  if (j.value("version", -1) != kModelFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported model version");

  EstimatorModel model;
  model.input_width_ = j.at("input_width").get<int>();
  model.norm_shift = j.at("norm_shift").get<std::vector<double>>();
  model.norm_scale = j.at("norm_scale").get<std::vector<double>>();
  for (const auto& one : j.at("layers")) {
    Layer layer;
    layer.inputs = one.at("inputs").get<int>();
    layer.outputs = one.at("outputs").get<int>();
    layer.weights = one.at("weights").get<std::vector<double>>();
    layer.biases = one.at("biases").get<std::vector<double>>();
    if (layer.weights.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs ||
        layer.biases.size() != static_cast<std::size_t>(layer.outputs))
      throw std::runtime_error(path.string() + ": inconsistent layer shapes");
    model.layers.push_back(std::move(layer));
  }
  if (model.layers.empty() || model.layers.front().inputs != model.input_width_ ||
      model.layers.back().outputs != 1 ||
      model.norm_shift.size() != static_cast<std::size_t>(model.input_width_) ||
      model.norm_scale.size() != static_cast<std::size_t>(model.input_width_))
    throw std::runtime_error(path.string() + ": inconsistent model shapes");
  const auto& m = j.at("meta");
  model.meta.epochs_trained = m.at("epochs_trained").get<int>();
  model.meta.train_mae = m.at("train_mae").get<double>();
  model.meta.test_mae = m.at("test_mae").get<double>();
  model.meta.seed = m.at("seed").get<std::uint64_t>();
  return model;
}

}  // namespace netslice
