#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgelat/errors.hpp"
#include "edgelat/harness.hpp"
#include "edgelat/synthdev.hpp"

namespace edgelat {

// Everything a CLI run can be configured with. A JSON document fills it;
// command-line flags override afterwards.
//
// {
//   "seed": 0,
//   "pool": {"range": [0, 2699], "ordering": "benchmark", "cells_per_stage": 5,
//            "devices": [{"id": ..., "runtime": "additive|optimized", "target_mean_s": ...,
//                         "overhead_s", "noise_cv", "fusion_discount", "skip_elision",
//                         "heterogeneity"}]},
//   "experiment": {"test_device", "pooling", "train_range", "test_range", "ordering",
//                  "n_adapt", "k_augment", "strategy", "normalization", "methods",
//                  "n_trials", "training_device"},
//   "training": {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon",
//                "hidden", "weight_decay"},
//   "ablation": {"poolings": [...]},
//   "sweep": {"n_values": [...], "k_values": [...]}
// }
struct CliConfig {
  std::uint64_t seed = 0;
  PoolSpec pool = default_pool_spec();
  ArchRange pool_range{0, 2699};
  ExperimentConfig experiment;
  std::vector<Method> methods{Method::kLut, Method::kMapleStar, Method::kMapleEdge};
  std::vector<Pooling> ablation_poolings{Pooling::kRuntime, Pooling::kCombined};
  std::vector<int> sweep_n{10, 25, 50, 100};
  std::vector<int> sweep_k{1, 4, 7};
};

namespace detail {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key_path(key) + ": wrong type");
    }
  }

  template <typename T>
  T required(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing required key '" + key_path(key) + "'");
    T v{};
    get(key, v);
    return v;
  }

  const json& child(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline ArchRange parse_range(const std::vector<std::int64_t>& v, const std::string& key) {
  if (v.size() != 2) throw ConfigError(key + ": expected [lo, hi]");
  return {v[0], v[1]};
}

inline Pooling parse_pooling(const std::string& s, const std::string& key) {
  if (s == "runtime") return Pooling::kRuntime;
  if (s == "combined") return Pooling::kCombined;
  if (s == "single_device_loocv") return Pooling::kSingleDeviceLoocv;
  throw ConfigError(key + ": unknown pooling '" + s + "'");
}

inline Method parse_method(const std::string& s, const std::string& key) {
  if (s == "maple_edge") return Method::kMapleEdge;
  if (s == "maple_star") return Method::kMapleStar;
  if (s == "lut") return Method::kLut;
  throw ConfigError(key + ": unknown method '" + s + "'");
}

inline ArchOrdering parse_ordering(const std::string& s, const std::string& key) {
  if (s == "benchmark") return ArchOrdering::kBenchmark;
  if (s == "canonical") return ArchOrdering::kCanonical;
  throw ConfigError(key + ": unknown ordering '" + s + "'");
}

inline SamplingStrategy parse_strategy(const std::string& s, const std::string& key) {
  if (s == "targeted_uniform") return SamplingStrategy::kTargetedUniform;
  if (s == "random") return SamplingStrategy::kRandom;
  throw ConfigError(key + ": unknown strategy '" + s + "'");
}

inline DescriptorKind parse_descriptor_kind(const std::string& s, const std::string& key) {
  if (s == "normalized") return DescriptorKind::kNormalized;
  if (s == "raw") return DescriptorKind::kRaw;
  throw ConfigError(key + ": unknown normalization '" + s + "'");
}

inline DeviceSpec parse_device(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DeviceSpec d;
  d.id = r.required<std::string>("id");
  if (d.id.empty() || d.id.find_first_of(" \t\n,") != std::string::npos) {
    throw ConfigError(r.key_path("id") + ": must be non-empty without spaces or commas");
  }
  const auto rt = parse_runtime(r.required<std::string>("runtime"));
  if (!rt || *rt == RuntimeKind::kImported) throw ConfigError(r.key_path("runtime") + ": expected additive|optimized");
  d.runtime = *rt;
  d.target_mean_s = r.required<double>("target_mean_s");
  if (r.has("overhead_s")) {
    double o = 0.0;
    r.get("overhead_s", o);
    d.overhead_s = o;
  }
  r.get("noise_cv", d.noise_cv);
  r.get("fusion_discount", d.fusion_discount);
  r.get("skip_elision", d.skip_elision);
  r.get("heterogeneity", d.heterogeneity);
  r.finish();
  if (!(d.target_mean_s > 0.0)) throw ConfigError(r.key_path("target_mean_s") + ": must be positive");
  return d;
}

inline void parse_pool(const json& j, CliConfig& c) {
  ObjectReader r(j, "pool");
  std::vector<std::int64_t> range{c.pool_range.lo, c.pool_range.hi};
  r.get("range", range);
  c.pool_range = parse_range(range, "pool.range");
  std::string ordering(ordering_name(c.pool.ordering));
  r.get("ordering", ordering);
  c.pool.ordering = parse_ordering(ordering, "pool.ordering");
  c.pool.calibration_range = c.pool_range;
  r.get("cells_per_stage", c.pool.macro.cells_per_stage);
  if (c.pool.macro.cells_per_stage < 1) throw ConfigError("pool.cells_per_stage: must be positive");
  if (r.has("devices")) {
    const json& devs = r.child("devices");
    if (!devs.is_array() || devs.empty()) throw ConfigError("pool.devices: expected a non-empty array");
    c.pool.devices.clear();
    for (std::size_t i = 0; i < devs.size(); ++i) {
      c.pool.devices.push_back(parse_device(devs[i], "pool.devices[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
}

inline void parse_experiment(const json& j, CliConfig& c) {
  ObjectReader r(j, "experiment");
  ExperimentConfig& e = c.experiment;
  r.get("test_device", e.test_device_id);
  std::string s(pooling_name(e.pooling));
  r.get("pooling", s);
  e.pooling = parse_pooling(s, "experiment.pooling");
  std::vector<std::int64_t> tr{e.train_range.lo, e.train_range.hi};
  r.get("train_range", tr);
  e.train_range = parse_range(tr, "experiment.train_range");
  std::vector<std::int64_t> te{e.test_range.lo, e.test_range.hi};
  r.get("test_range", te);
  e.test_range = parse_range(te, "experiment.test_range");
  s = ordering_name(e.ordering);
  r.get("ordering", s);
  e.ordering = parse_ordering(s, "experiment.ordering");
  r.get("n_adapt", e.n_adapt);
  r.get("k_augment", e.k_augment);
  s = strategy_name(e.strategy);
  r.get("strategy", s);
  e.strategy = parse_strategy(s, "experiment.strategy");
  s = descriptor_kind_name(e.normalization);
  r.get("normalization", s);
  e.normalization = parse_descriptor_kind(s, "experiment.normalization");
  if (r.has("methods")) {
    std::vector<std::string> ms;
    r.get("methods", ms);
    if (ms.empty()) throw ConfigError("experiment.methods: expected at least one method");
    c.methods.clear();
    for (const auto& m : ms) c.methods.push_back(parse_method(m, "experiment.methods"));
  }
  r.get("n_trials", e.n_trials);
  r.get("training_device", e.training_device);
  r.finish();
}

inline void parse_training(const json& j, TrainConfig& t) {
  ObjectReader r(j, "training");
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("learning_rate", t.learning_rate);
  r.get("beta1", t.beta1);
  r.get("beta2", t.beta2);
  r.get("epsilon", t.epsilon);
  r.get("hidden", t.hidden);
  r.get("weight_decay", t.weight_decay);
  r.finish();
  if (t.epochs < 1 || t.batch_size < 1) throw ConfigError("training: epochs and batch_size must be >= 1");
  if (!(t.learning_rate > 0.0)) throw ConfigError("training.learning_rate: must be positive");
  if (!(t.weight_decay >= 0.0)) throw ConfigError("training.weight_decay: must be non-negative");
  if (t.hidden.empty()) throw ConfigError("training.hidden: need at least one hidden layer");
  for (int h : t.hidden) {
    if (h < 1) throw ConfigError("training.hidden: sizes must be positive");
  }
}

}  // namespace detail

inline CliConfig parse_config(const nlohmann::json& j) {
  CliConfig c;
  detail::ObjectReader r(j, "");
  r.get("seed", c.seed);
  if (r.has("pool")) detail::parse_pool(r.child("pool"), c);
  if (r.has("experiment")) detail::parse_experiment(r.child("experiment"), c);
  if (r.has("training")) detail::parse_training(r.child("training"), c.experiment.training);
  if (r.has("ablation")) {
    detail::ObjectReader a(r.child("ablation"), "ablation");
    std::vector<std::string> ps;
    a.get("poolings", ps);
    a.finish();
    if (!ps.empty()) {
      c.ablation_poolings.clear();
      for (const auto& p : ps) c.ablation_poolings.push_back(detail::parse_pooling(p, "ablation.poolings"));
    }
  }
  if (r.has("sweep")) {
    detail::ObjectReader s(r.child("sweep"), "sweep");
    s.get("n_values", c.sweep_n);
    s.get("k_values", c.sweep_k);
    s.finish();
  }
  r.finish();
  c.experiment.seed = c.seed;
  return c;
}

inline CliConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return parse_config(j);
}

inline CliConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace edgelat
