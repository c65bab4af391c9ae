#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "edgelat/archspace.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/dataset.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"

namespace edgelat {

inline constexpr std::size_t kFeatureSize = kEncodingSize + kDescriptorSize;  // 135

enum class RowSource : std::uint8_t { kInitial, kAdaptation };

// One (architecture, device) example. Features are unstandardized
// [one-hot encoding, descriptor]; the model owns the standardization.
// target is log(latency in seconds).
struct TrainingRow {
  std::vector<double> features;
  double target = 0.0;
  double weight = 1.0;
  RowSource source = RowSource::kInitial;
  std::uint32_t arch_index = 0;
  std::string device_id;

  friend bool operator==(const TrainingRow&, const TrainingRow&) = default;
};

inline std::vector<double> make_features(const CellArchitecture& arch, const HardwareDescriptor& descriptor) {
  if (descriptor.values.size() != kDescriptorSize) {
    throw StructuralError("descriptor length " + std::to_string(descriptor.values.size()) + ", expected 105");
  }
  const auto enc = encode_architecture(arch);
  std::vector<double> f(enc.begin(), enc.end());
  f.insert(f.end(), descriptor.values.begin(), descriptor.values.end());
  return f;
}

inline TrainingRow make_row(const CellArchitecture& arch, const HardwareDescriptor& descriptor, double latency_s,
                            RowSource source = RowSource::kInitial) {
  if (!(latency_s > 0.0)) throw DomainError("training latency must be positive");
  return {make_features(arch, descriptor), std::log(latency_s), 1.0, source, arch.index, descriptor.device_id};
}

struct TrainConfig {
  int epochs = 200;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<int> hidden = {128, 128};
  double weight_decay = 3e-3;  // L2 penalty on weights (not biases), added to the gradient
  std::uint64_t seed = 0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() && a.weight == b.weight &&
           a.bias == b.bias;
  }
};

// Feedforward regressor: rectifier hidden layers, linear output. Inputs are
// standardized with stored statistics and the output is a standardized
// log-latency, so predict() returns exp(out * target_scale + target_mean).
struct RegressionModel {
  std::vector<int> layer_sizes;
  std::vector<DenseLayer> layers;
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
  DescriptorKind descriptor_kind = DescriptorKind::kNormalized;
  std::uint64_t seed = 0;

  std::size_t input_size() const { return static_cast<std::size_t>(layer_sizes.front()); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
  }

  // Flat view: per layer, weights (column-major) then biases.
  double& parameter(std::size_t k) {
    for (auto& l : layers) {
      const auto nw = static_cast<std::size_t>(l.weight.size());
      if (k < nw) return l.weight.data()[k];
      k -= nw;
      const auto nb = static_cast<std::size_t>(l.bias.size());
      if (k < nb) return l.bias.data()[k];
      k -= nb;
    }
    throw RangeError("parameter index out of range");
  }

  friend bool operator==(const RegressionModel&, const RegressionModel&) = default;
};

inline RegressionModel init_model(std::size_t input_size, const TrainConfig& cfg) {
  RegressionModel m;
  m.seed = cfg.seed;
  m.layer_sizes.push_back(static_cast<int>(input_size));
  for (int h : cfg.hidden) {
    if (h < 1) throw RangeError("hidden layer width must be positive");
    m.layer_sizes.push_back(h);
  }
  m.layer_sizes.push_back(1);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const int fan_in = m.layer_sizes[l];
    const int fan_out = m.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Rng rng(derive_seed(cfg.seed, l, "init"));
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = rng.uniform(-limit, limit);
    m.layers.push_back(std::move(layer));
  }
  m.feature_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_size));
  m.feature_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(input_size));
  return m;
}

namespace detail {

// Weighted mean / population std-dev; near-constant features get scale 1.
inline void fit_standardization(RegressionModel& m, std::span<const TrainingRow> rows) {
  const auto d = static_cast<Eigen::Index>(m.input_size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(d);
  double wsum = 0.0;
  double tmean = 0.0;
  double tsq = 0.0;
  for (const auto& r : rows) {
    const Eigen::Map<const Eigen::VectorXd> x(r.features.data(), d);
    mean += r.weight * x;
    tmean += r.weight * r.target;
    wsum += r.weight;
  }
  mean /= wsum;
  tmean /= wsum;
  for (const auto& r : rows) {
    const Eigen::Map<const Eigen::VectorXd> x(r.features.data(), d);
    sq += r.weight * (x - mean).cwiseAbs2();
    tsq += r.weight * (r.target - tmean) * (r.target - tmean);
  }
  Eigen::VectorXd scale = (sq / wsum).cwiseSqrt();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(scale[i] > 1e-12 * std::max(1.0, std::abs(mean[i])))) scale[i] = 1.0;
  }
  double tscale = std::sqrt(tsq / wsum);
  if (!(tscale > 1e-12)) tscale = 1.0;
  m.feature_mean = mean;
  m.feature_scale = scale;
  m.target_mean = tmean;
  m.target_scale = tscale;
}

inline void validate_rows(std::span<const TrainingRow> rows, std::size_t input_size) {
  if (rows.empty()) throw StructuralError("no training rows");
  for (const auto& r : rows) {
    if (r.features.size() != input_size) {
      throw StructuralError("training row has " + std::to_string(r.features.size()) + " features, expected " +
                            std::to_string(input_size));
    }
    for (double f : r.features) {
      if (!std::isfinite(f)) throw DataError("non-finite feature in training row");
    }
    if (!std::isfinite(r.target)) throw DataError("non-finite training target");
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) throw DataError("training row weight must be positive");
  }
}

// Column-per-example batch of standardized inputs and targets.
struct Batch {
  Eigen::MatrixXd x;  // in x B
  Eigen::VectorXd z;  // standardized targets
  Eigen::VectorXd w;  // row weights
};

inline Batch make_batch(const RegressionModel& m, std::span<const TrainingRow> rows,
                        std::span<const std::size_t> order = {}) {
  const auto d = static_cast<Eigen::Index>(m.input_size());
  const auto b = static_cast<Eigen::Index>(order.empty() ? rows.size() : order.size());
  Batch batch{Eigen::MatrixXd(d, b), Eigen::VectorXd(b), Eigen::VectorXd(b)};
  const Eigen::ArrayXd inv_scale = m.feature_scale.array().inverse();
  for (Eigen::Index j = 0; j < b; ++j) {
    const TrainingRow& r = rows[order.empty() ? static_cast<std::size_t>(j) : order[static_cast<std::size_t>(j)]];
    const Eigen::Map<const Eigen::VectorXd> x(r.features.data(), d);
    batch.x.col(j) = ((x - m.feature_mean).array() * inv_scale).matrix();
    batch.z[j] = (r.target - m.target_mean) / m.target_scale;
    batch.w[j] = r.weight;
  }
  return batch;
}

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

inline Eigen::RowVectorXd forward(const RegressionModel& m, const Eigen::MatrixXd& x,
                                  std::vector<Eigen::MatrixXd>* activations = nullptr) {
  Eigen::MatrixXd a = x;
  const std::size_t last = m.layers.size() - 1;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Eigen::MatrixXd z = m.layers[l].weight * a;
    z.colwise() += m.layers[l].bias;
    if (activations) activations->push_back(std::move(a));
    a = l == last ? std::move(z) : Eigen::MatrixXd(z.cwiseMax(0.0));
  }
  return a.row(0);
}

// Weighted MSE in standardized target space: sum w (o - z)^2 / sum w.
inline double batch_loss(const RegressionModel& m, const Batch& b) {
  const Eigen::RowVectorXd out = forward(m, b.x);
  return (b.w.array() * (out.transpose() - b.z).array().square()).sum() / b.w.sum();
}

inline double batch_loss_and_gradient(const RegressionModel& m, const Batch& b, Gradients& g) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(m.layers.size());
  const Eigen::RowVectorXd out = forward(m, b.x, &acts);
  const double wsum = b.w.sum();
  const Eigen::ArrayXd err = out.transpose() - b.z;
  const double loss = (b.w.array() * err.square()).sum() / wsum;

  g.weight.resize(m.layers.size());
  g.bias.resize(m.layers.size());
  Eigen::MatrixXd delta = (2.0 / wsum * (b.w.array() * err)).matrix().transpose();  // 1 x B
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    g.weight[l].noalias() = delta * acts[l].transpose();
    g.bias[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = m.layers[l].weight.transpose() * delta;
    // acts[l] is the rectified output of layer l-1; its zeros mark the inactive units.
    delta = (acts[l].array() > 0.0).select(back, 0.0);
  }
  return loss;
}

}  // namespace detail

// Full-batch loss gradient with the model's current standardization,
// flattened in RegressionModel::parameter order.
inline std::vector<double> loss_gradient(const RegressionModel& m, std::span<const TrainingRow> rows) {
  detail::validate_rows(rows, m.input_size());
  detail::Gradients g;
  detail::batch_loss_and_gradient(m, detail::make_batch(m, rows), g);
  std::vector<double> flat;
  flat.reserve(m.parameter_count());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    flat.insert(flat.end(), g.weight[l].data(), g.weight[l].data() + g.weight[l].size());
    flat.insert(flat.end(), g.bias[l].data(), g.bias[l].data() + g.bias[l].size());
  }
  return flat;
}

inline double training_loss(const RegressionModel& m, std::span<const TrainingRow> rows) {
  detail::validate_rows(rows, m.input_size());
  return detail::batch_loss(m, detail::make_batch(m, rows));
}

// Weighted mean squared error of log-latency predictions.
inline double log_space_mse(const RegressionModel& m, std::span<const TrainingRow> rows) {
  return training_loss(m, rows) * m.target_scale * m.target_scale;
}

struct TrainOutcome {
  RegressionModel model;
  double final_log_mse = 0.0;
  double wall_seconds = 0.0;
};

inline TrainOutcome train_with_summary(std::span<const TrainingRow> rows, const TrainConfig& cfg) {
  if (rows.empty()) throw StructuralError("no training rows");
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw RangeError("epochs and batch_size must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw RangeError("learning_rate must be positive");
  if (!(cfg.weight_decay >= 0.0)) throw RangeError("weight_decay must be non-negative");
  const auto start = std::chrono::steady_clock::now();
  detail::validate_rows(rows, rows.front().features.size());

  RegressionModel m = init_model(rows.front().features.size(), cfg);
  detail::fit_standardization(m, rows);

  const std::size_t nl = m.layers.size();
  std::vector<Eigen::MatrixXd> mw(nl), vw(nl);
  std::vector<Eigen::VectorXd> mb(nl), vb(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    mw[l] = vw[l] = Eigen::MatrixXd::Zero(m.layers[l].weight.rows(), m.layers[l].weight.cols());
    mb[l] = vb[l] = Eigen::VectorXd::Zero(m.layers[l].bias.size());
  }

  std::vector<std::size_t> order(rows.size());
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  detail::Gradients g;
  double b1t = 1.0;
  double b2t = 1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch), "shuffle"));
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start_i = 0; start_i < order.size(); start_i += bs) {
      const std::size_t len = std::min(bs, order.size() - start_i);
      const auto batch = detail::make_batch(m, rows, std::span<const std::size_t>(order).subspan(start_i, len));
      detail::batch_loss_and_gradient(m, batch, g);
      b1t *= cfg.beta1;
      b2t *= cfg.beta2;
      const double step = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
      const double eps_hat = cfg.epsilon * std::sqrt(1.0 - b2t);
      for (std::size_t l = 0; l < nl; ++l) {
        if (cfg.weight_decay > 0.0) g.weight[l] += cfg.weight_decay * m.layers[l].weight;
        mw[l] = cfg.beta1 * mw[l] + (1.0 - cfg.beta1) * g.weight[l];
        vw[l] = cfg.beta2 * vw[l] + (1.0 - cfg.beta2) * g.weight[l].cwiseAbs2();
        m.layers[l].weight.array() -= step * mw[l].array() / (vw[l].array().sqrt() + eps_hat);
        mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * g.bias[l];
        vb[l] = cfg.beta2 * vb[l] + (1.0 - cfg.beta2) * g.bias[l].cwiseAbs2();
        m.layers[l].bias.array() -= step * mb[l].array() / (vb[l].array().sqrt() + eps_hat);
      }
    }
  }

  TrainOutcome out;
  out.final_log_mse = log_space_mse(m, rows);
  out.model = std::move(m);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

inline RegressionModel train(std::span<const TrainingRow> rows, const TrainConfig& cfg) {
  return train_with_summary(rows, cfg).model;
}

// Latency in seconds for each feature vector (one column each, unstandardized).
inline std::vector<double> predict_features(const RegressionModel& m, const std::vector<std::vector<double>>& feats) {
  const auto d = static_cast<Eigen::Index>(m.input_size());
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(feats.size()));
  const Eigen::ArrayXd inv_scale = m.feature_scale.array().inverse();
  for (std::size_t j = 0; j < feats.size(); ++j) {
    if (feats[j].size() != m.input_size()) {
      throw StructuralError("feature vector has " + std::to_string(feats[j].size()) + " entries, model expects " +
                            std::to_string(m.input_size()));
    }
    const Eigen::Map<const Eigen::VectorXd> f(feats[j].data(), d);
    x.col(static_cast<Eigen::Index>(j)) = ((f - m.feature_mean).array() * inv_scale).matrix();
  }
  const Eigen::RowVectorXd out = detail::forward(m, x);
  std::vector<double> y(feats.size());
  for (std::size_t j = 0; j < feats.size(); ++j) {
    y[j] = std::exp(out[static_cast<Eigen::Index>(j)] * m.target_scale + m.target_mean);
  }
  return y;
}

inline double predict(const RegressionModel& m, const CellArchitecture& arch, const HardwareDescriptor& descriptor) {
  if (m.input_size() != kFeatureSize) {
    throw StructuralError("model input size " + std::to_string(m.input_size()) + " does not match 135 features");
  }
  return predict_features(m, {make_features(arch, descriptor)}).front();
}

inline std::vector<double> predict_many(const RegressionModel& m, std::span<const std::uint32_t> arch_indices,
                                        const HardwareDescriptor& descriptor) {
  if (m.input_size() != kFeatureSize) {
    throw StructuralError("model input size " + std::to_string(m.input_size()) + " does not match 135 features");
  }
  std::vector<std::vector<double>> feats;
  feats.reserve(arch_indices.size());
  for (auto a : arch_indices) feats.push_back(make_features(architecture_from_index(a), descriptor));
  return predict_features(m, feats);
}

// ---------------------------------------------------------------------------
// Gradient check

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  std::size_t checked = 0;
  bool passed = false;
};

// Central differences (step 1e-5) on a seeded random subset of parameters.
// Relative error is |a - n| / max(|a|, |n|, 1e-6); the floor keeps
// near-zero gradients from being judged on round-off alone.
inline GradientCheckReport gradient_check(const RegressionModel& model, std::span<const TrainingRow> rows,
                                          double tolerance, std::size_t subset = 64, std::uint64_t seed = 0) {
  constexpr double kStep = 1e-5;
  const auto analytic = loss_gradient(model, rows);
  RegressionModel probe = model;
  const auto batch = detail::make_batch(model, rows);

  std::vector<std::size_t> params(probe.parameter_count());
  std::iota(params.begin(), params.end(), std::size_t{0});
  if (subset < params.size()) {
    Rng rng(derive_seed(seed, model.seed, "gradient_check"));
    for (std::size_t i = 0; i < subset; ++i) std::swap(params[i], params[i + rng.below(params.size() - i)]);
    params.resize(subset);
  }

  GradientCheckReport rep;
  for (std::size_t k : params) {
    double& p = probe.parameter(k);
    const double saved = p;
    p = saved + kStep;
    const double up = detail::batch_loss(probe, batch);
    p = saved - kStep;
    const double down = detail::batch_loss(probe, batch);
    p = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double a = analytic[k];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (rel > rep.max_relative_error || rep.checked == 0) {
      rep.max_relative_error = rel;
      rep.worst_parameter = k;
    }
    ++rep.checked;
  }
  rep.passed = rep.max_relative_error < tolerance;
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence
//
//   edgelat-model v1
//   seed <u64>
//   descriptor <normalized|raw>
//   target_transform log_standardized <mean> <scale>
//   layers <n0> <n1> ... <nL>
//   feature_mean <n0 reals>
//   feature_scale <n0 reals>
//   weight <l> <out*in reals, row-major>
//   bias <l> <out reals>

inline void write_model(std::ostream& os, const RegressionModel& m) {
  os << "edgelat-model v1\n";
  os << "seed " << m.seed << '\n';
  os << "descriptor " << (m.descriptor_kind == DescriptorKind::kNormalized ? "normalized" : "raw") << '\n';
  os << "target_transform log_standardized " << format_real(m.target_mean) << ' ' << format_real(m.target_scale)
     << '\n';
  os << "layers";
  for (int s : m.layer_sizes) os << ' ' << s;
  os << '\n';
  auto vec = [&](std::string_view tag, const Eigen::VectorXd& v) {
    os << tag;
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << format_real(v[i]);
    os << '\n';
  };
  vec("feature_mean", m.feature_mean);
  vec("feature_scale", m.feature_scale);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& w = m.layers[l].weight;
    os << "weight " << l;
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) os << ' ' << format_real(w(r, c));
    }
    os << '\n';
    vec("bias " + std::to_string(l), m.layers[l].bias);
  }
}

inline RegressionModel read_model(std::istream& is, const std::string& path = "<stream>") {
  RegressionModel m;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](std::string_view expect) {
    while (std::getline(is, line)) {
      ++lineno;
      auto toks = detail::split_ws(line);
      if (toks.empty() || toks[0].front() == '#') continue;
      if (toks[0] != expect) {
        throw ParseError(path, lineno, "expected '" + std::string(expect) + "', got '" + std::string(toks[0]) + "'");
      }
      return toks;
    }
    throw ParseError(path, lineno, "unexpected end of file, expected '" + std::string(expect) + "'");
  };
  auto reals = [&](const std::vector<std::string_view>& toks, std::size_t from, std::size_t count,
                   std::string_view field) {
    if (toks.size() != from + count) {
      throw ParseError(path, lineno, std::string(field) + ": expected " + std::to_string(count) + " values");
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) v[static_cast<Eigen::Index>(i)] = detail::parse_real(toks[from + i], path, lineno, field);
    return v;
  };

  auto header = next("edgelat-model");
  if (header.size() != 2 || header[1] != "v1") throw ParseError(path, lineno, "header: expected 'edgelat-model v1'");
  auto seed = next("seed");
  if (seed.size() != 2) throw ParseError(path, lineno, "seed: expected one value");
  {
    auto [p, ec] = std::from_chars(seed[1].data(), seed[1].data() + seed[1].size(), m.seed);
    if (ec != std::errc() || p != seed[1].data() + seed[1].size()) throw ParseError(path, lineno, "seed: not a u64");
  }
  auto desc = next("descriptor");
  if (desc.size() != 2 || (desc[1] != "normalized" && desc[1] != "raw")) {
    throw ParseError(path, lineno, "descriptor: expected normalized|raw");
  }
  m.descriptor_kind = desc[1] == "raw" ? DescriptorKind::kRaw : DescriptorKind::kNormalized;
  auto tt = next("target_transform");
  if (tt.size() != 4 || tt[1] != "log_standardized") {
    throw ParseError(path, lineno, "target_transform: expected 'log_standardized <mean> <scale>'");
  }
  m.target_mean = detail::parse_real(tt[2], path, lineno, "target_transform.mean");
  m.target_scale = detail::parse_real(tt[3], path, lineno, "target_transform.scale");
  auto layers = next("layers");
  if (layers.size() < 3) throw ParseError(path, lineno, "layers: need at least input and output sizes");
  for (std::size_t i = 1; i < layers.size(); ++i) {
    const auto s = detail::parse_int(layers[i], path, lineno, "layers");
    if (s < 1) throw ParseError(path, lineno, "layers: sizes must be positive");
    m.layer_sizes.push_back(static_cast<int>(s));
  }
  if (m.layer_sizes.back() != 1) throw ParseError(path, lineno, "layers: output size must be 1");
  const auto in = static_cast<std::size_t>(m.layer_sizes.front());
  m.feature_mean = reals(next("feature_mean"), 1, in, "feature_mean");
  m.feature_scale = reals(next("feature_scale"), 1, in, "feature_scale");
  for (Eigen::Index i = 0; i < m.feature_scale.size(); ++i) {
    if (!(m.feature_scale[i] > 0.0)) throw ParseError(path, lineno, "feature_scale: entries must be positive");
  }
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const auto rows = static_cast<std::size_t>(m.layer_sizes[l + 1]);
    const auto cols = static_cast<std::size_t>(m.layer_sizes[l]);
    auto wt = next("weight");
    if (wt.size() < 2 || detail::parse_int(wt[1], path, lineno, "weight.layer") != static_cast<std::int64_t>(l)) {
      throw ParseError(path, lineno, "weight: expected layer " + std::to_string(l));
    }
    const Eigen::VectorXd flat = reals(wt, 2, rows * cols, "weight");
    DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd()};
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        layer.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            flat[static_cast<Eigen::Index>(r * cols + c)];
      }
    }
    auto bt = next("bias");
    if (bt.size() < 2 || detail::parse_int(bt[1], path, lineno, "bias.layer") != static_cast<std::int64_t>(l)) {
      throw ParseError(path, lineno, "bias: expected layer " + std::to_string(l));
    }
    layer.bias = reals(bt, 2, rows, "bias");
    m.layers.push_back(std::move(layer));
  }
  return m;
}

inline void save_model(const RegressionModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_model(os, m);
  if (!os) throw Error("write to '" + path + "' failed");
}

inline RegressionModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_model(is, path);
}

}  // namespace edgelat
