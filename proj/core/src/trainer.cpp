#include "pgig/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pgig/csv.hpp"
#include "pgig/error.hpp"

namespace pgig::train {

namespace {

// Templates are drawn on a 16×16 reference grid and resampled to `side`.
bool template_pixel(std::size_t cls, std::size_t r, std::size_t c) {
  switch (cls) {
    case 0:  // horizontal bar, upper band
      return (r == 2 || r == 3) && c >= 2 && c <= 13;
    case 1:  // vertical bar, right band
      return (c == 12 || c == 13) && r >= 2 && r <= 13;
    case 2:  // plus sign, lower left
      return ((r == 10 || r == 11) && c >= 1 && c <= 8) || ((c == 4 || c == 5) && r >= 7 && r <= 14);
    case 3:  // main diagonal, two pixels wide
      return c == r || c == r + 1;
  }
  return false;
}

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

Split make_split(const SyntheticTask& task, std::size_t count, RandomSource& rng) {
  const TaskConfig& cfg = task.config;
  const std::size_t pixels = cfg.side * cfg.side;
  Split split;
  split.images.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t label = n % TaskConfig::kClasses;
    const double amplitude = cfg.min_amplitude + (1.0 - cfg.min_amplitude) * rng.uniform();
    const double shared = rng.normal(0.0, cfg.shared_noise_sigma);
    const Tensor& tpl = task.templates[label];
    std::vector<double> img(pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
      const double v = amplitude * tpl[i] + shared * task.distractor_direction[i] +
                       rng.normal(0.0, cfg.pixel_noise_sigma);
      img[i] = std::clamp(v, -1.0, 1.0);
    }
    split.images.push_back(Tensor::vector(std::move(img)));
    split.labels.push_back(label);
  }
  return split;
}

}  // namespace

TaskConfig TaskConfig::noiseless() {
  TaskConfig cfg;
  cfg.min_amplitude = 1.0;
  cfg.shared_noise_sigma = 0.0;
  cfg.pixel_noise_sigma = 0.0;
  return cfg;
}

void TaskConfig::validate() const {
  if (side < 8) throw ArgumentError("image side must be >= 8");
  if (train_size < 1 || val_size < 1) throw ArgumentError("train and val splits must be non-empty");
  if (!(min_amplitude > 0.0 && min_amplitude <= 1.0)) throw ArgumentError("min_amplitude must be in (0, 1]");
  if (!(shared_noise_sigma >= 0.0) || !(pixel_noise_sigma >= 0.0)) throw ArgumentError("noise sigmas must be >= 0");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ArgumentError("learning rate must be finite and >= 0");
  if (epochs < 1) throw ArgumentError("epochs must be >= 1");
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  for (std::size_t h : hidden) {
    if (h < 1) throw ArgumentError("hidden layer sizes must be positive");
  }
}

std::vector<Tensor> class_templates(std::size_t side) {
  std::vector<Tensor> out;
  for (std::size_t cls = 0; cls < TaskConfig::kClasses; ++cls) {
    std::vector<double> px(side * side, 0.0);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) {
        px[r * side + c] = template_pixel(cls, r * 16 / side, c * 16 / side) ? 1.0 : 0.0;
      }
    }
    out.push_back(Tensor::vector(std::move(px)));
  }
  return out;
}

Tensor distractor_direction(std::size_t side) {
  std::vector<double> d(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      d[r * side + c] = -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(side - 1);
    }
  }
  return Tensor::vector(std::move(d));
}

SyntheticTask generate_task(const TaskConfig& cfg, RandomSource& rng) {
  cfg.validate();
  SyntheticTask task{cfg, class_templates(cfg.side), distractor_direction(cfg.side), {}, {}, {}};
  task.train = make_split(task, cfg.train_size, rng);
  task.val = make_split(task, cfg.val_size, rng);
  task.test = make_split(task, cfg.test_size, rng);
  return task;
}

Network initialize_network(std::size_t inputs, std::span<const std::size_t> hidden, std::size_t classes,
                           RandomSource& rng) {
  std::vector<std::size_t> dims{inputs};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(classes);
  std::vector<Layer> layers;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const std::size_t in = dims[k], out = dims[k + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(in + out));
    std::vector<double> w(in * out);
    for (double& v : w) v = -r + 2.0 * r * rng.uniform();
    const Activation act = k + 2 == dims.size() ? Activation::Linear : Activation::ReLU;
    layers.push_back(make_layer(Tensor::matrix(out, in, std::move(w)), Tensor::zeros({out}), act));
  }
  return Network(std::move(layers), OutputMode::Softmax);
}

double accuracy(const Network& net, const Split& split) {
  if (split.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    correct += argmax(forward(net, split.images[i]).logits()) == split.labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

TrainResult train(const SyntheticTask& task, const TrainConfig& cfg) {
  cfg.validate();
  if (task.train.size() == 0) throw ArgumentError("empty training split");
  RandomSource rng(cfg.seed);
  const std::size_t pixels = task.config.side * task.config.side;
  Network net = initialize_network(pixels, cfg.hidden, TaskConfig::kClasses, rng);

  TrainResult result{net, 0, accuracy(net, task.val), {}};
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        ParameterGradients acc;
        for (const Layer& l : net.layers()) {
          acc.weights.emplace_back(l.weights.size(), 0.0);
          acc.bias.emplace_back(l.bias.size(), 0.0);
        }
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t idx = order[b];
          const std::size_t label = task.train.labels[idx];
          const ForwardTrace trace = forward(net, task.train.images[idx]);
          const auto logits = trace.logits().values();
          const double loss = log_sum_exp(logits) - logits[label];
          if (!std::isfinite(loss)) throw TrainingError(epoch, "cross-entropy loss is not finite");
          loss_sum += loss;
          std::vector<double> seed = trace.output.to_vector();
          seed[label] -= 1.0;
          const ParameterGradients g = parameter_gradients(net, trace, Tensor::vector(std::move(seed)));
          for (std::size_t k = 0; k < acc.weights.size(); ++k) {
            for (std::size_t i = 0; i < acc.weights[k].size(); ++i) acc.weights[k][i] += g.weights[k][i];
            for (std::size_t i = 0; i < acc.bias[k].size(); ++i) acc.bias[k][i] += g.bias[k][i];
          }
        }
        const double step = cfg.learning_rate / static_cast<double>(end - start);
        std::vector<Layer> layers;
        for (std::size_t k = 0; k < net.depth(); ++k) {
          const Layer& l = net.layer(k);
          std::vector<double> w = l.weights.to_vector();
          std::vector<double> bias = l.bias.to_vector();
          for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * acc.weights[k][i];
          for (std::size_t i = 0; i < bias.size(); ++i) bias[i] -= step * acc.bias[k][i];
          try {
            layers.push_back(make_layer(Tensor(l.weights.shape(), std::move(w)), Tensor::vector(std::move(bias)),
                                        l.activation));
          } catch (const NumericError&) {
            throw TrainingError(epoch, "parameters of layer " + std::to_string(k) + " diverged");
          }
        }
        net = Network(std::move(layers), OutputMode::Softmax);
      }
    } catch (const TrainingError&) {
      throw;
    } catch (const NumericError& e) {
      throw TrainingError(epoch, e.what());
    }

    const double val = accuracy(net, task.val);
    result.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), val});
    if (val >= result.best_val_accuracy) {
      result.best_val_accuracy = val;
      result.best_epoch = epoch;
      result.network = net;
    }
  }
  return result;
}

FitResult fit_patterns(const Network& net, std::span<const Tensor> data, const PatternOptions& options) {
  const PatternBatch batch = collect_batch(net, data);
  PatternSet patterns = estimate_patterns(batch, net, options);
  const std::size_t invalid = patterns.invalid_count();
  Network with = attach_patterns(net, patterns);
  return FitResult{std::move(with), std::move(patterns), invalid};
}

void write_split(const std::filesystem::path& path, const Split& split) {
  CsvTable t;
  const std::size_t pixels = split.size() ? split.images.front().size() : 0;
  t.header.push_back("label");
  for (std::size_t i = 0; i < pixels; ++i) t.header.push_back("p" + std::to_string(i));
  for (std::size_t n = 0; n < split.size(); ++n) {
    std::vector<double> row{static_cast<double>(split.labels[n])};
    const auto px = split.images[n].values();
    row.insert(row.end(), px.begin(), px.end());
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Split read_split(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.empty() || t.header.front() != "label") {
    throw ParseError(path.string(), 1, "expected first column 'label'");
  }
  Split split;
  for (std::size_t n = 0; n < t.rows.size(); ++n) {
    const auto& row = t.rows[n];
    const double label = row.front();
    if (label < 0 || label != std::floor(label)) {
      throw ParseError(path.string(), n + 2, "label must be a non-negative integer");
    }
    split.labels.push_back(static_cast<std::size_t>(label));
    split.images.push_back(Tensor::vector(std::vector<double>(row.begin() + 1, row.end())));
  }
  return split;
}

}  // namespace pgig::train
