#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgelat/archspace.hpp"
#include "edgelat/baselines.hpp"
#include "edgelat/counters.hpp"
#include "edgelat/dataset.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"
#include "edgelat/regressor.hpp"
#include "edgelat/sampler.hpp"

namespace edgelat {

enum class Pooling : std::uint8_t { kRuntime, kCombined, kSingleDeviceLoocv };
enum class Method : std::uint8_t { kMapleEdge, kMapleStar, kLut };

inline std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::kRuntime: return "runtime";
    case Pooling::kCombined: return "combined";
    case Pooling::kSingleDeviceLoocv: return "single_device_loocv";
  }
  return "?";
}

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::kMapleEdge: return "maple_edge";
    case Method::kMapleStar: return "maple_star";
    case Method::kLut: return "lut";
  }
  return "?";
}

inline std::string_view descriptor_kind_name(DescriptorKind k) {
  return k == DescriptorKind::kNormalized ? "normalized" : "raw";
}

struct ExperimentConfig {
  std::string test_device_id;
  Pooling pooling = Pooling::kRuntime;
  ArchRange train_range{0, 899};
  ArchRange test_range{1800, 2699};
  ArchOrdering ordering = ArchOrdering::kBenchmark;
  int n_adapt = 10;
  int k_augment = 7;
  SamplingStrategy strategy = SamplingStrategy::kTargetedUniform;
  DescriptorKind normalization = DescriptorKind::kNormalized;
  Method method = Method::kMapleEdge;
  int n_trials = 10;
  std::uint64_t seed = 0;
  TrainConfig training;  // training.seed is replaced per trial
  // Restricts SINGLE_DEVICE_LOOCV to one trainer; empty iterates all candidates.
  std::string training_device;
  int jobs = 1;
};

// ★ is the original method: raw counters, random adaptation, no clones.
struct MethodSettings {
  SamplingStrategy strategy;
  DescriptorKind normalization;
  int k_augment;
};

inline MethodSettings effective_settings(const ExperimentConfig& c) {
  if (c.method == Method::kMapleStar) return {SamplingStrategy::kRandom, DescriptorKind::kRaw, 1};
  return {c.strategy, c.normalization, c.k_augment};
}

struct PredictionPair {
  std::uint32_t arch_index = 0;
  double predicted_s = 0.0;
  double true_s = 0.0;
};

struct TrialResult {
  std::string training_pool;  // comma-joined device ids
  std::vector<std::uint32_t> adaptation;
  double accuracy = 0.0;
  double final_log_mse = 0.0;
};

struct EvalReport {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;
  std::vector<PredictionPair> last_trial_pairs;
  double wall_seconds = 0.0;

  std::vector<double> accuracies() const {
    std::vector<double> a;
    for (const auto& t : trials) a.push_back(t.accuracy);
    return a;
  }
};

// Percentage of pairs with |predicted - true| <= bound * true (inclusive).
// A 1e-12 relative slack absorbs decimal rounding so that, e.g., 1.10 vs
// 1.00 lands on the boundary rather than just past it.
inline constexpr double kBoundSlack = 1e-12;

inline bool within_bound(double predicted, double truth, double bound = 0.10) {
  return std::abs(predicted - truth) <= (bound + kBoundSlack) * truth;
}

inline double bound_accuracy(std::span<const PredictionPair> pairs, double bound = 0.10) {
  if (pairs.empty()) throw StructuralError("bound_accuracy needs at least one pair");
  std::size_t hit = 0;
  for (const auto& p : pairs) {
    if (!(p.true_s > 0.0)) throw DomainError("true latency must be positive");
    if (within_bound(p.predicted_s, p.true_s, bound)) ++hit;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(pairs.size());
}

inline double bound_accuracy(std::initializer_list<std::pair<double, double>> pairs, double bound = 0.10) {
  std::vector<PredictionPair> v;
  for (auto [p, t] : pairs) v.push_back({0, p, t});
  return bound_accuracy(v, bound);
}

inline std::pair<double, double> mean_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

inline void validate_experiment(const MeasurementDataset& ds, const ExperimentConfig& c) {
  if (ds.find_device(c.test_device_id) == nullptr) {
    throw ConfigError("test device '" + c.test_device_id + "' not in dataset");
  }
  validate_range(c.train_range);
  validate_range(c.test_range);
  if (c.train_range.overlaps(c.test_range)) throw ConfigError("train and test ranges overlap");
  if (c.n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (c.k_augment < 1) throw ConfigError("k_augment must be >= 1");
  if (c.n_adapt < 1 || static_cast<std::size_t>(c.n_adapt) > c.train_range.size()) {
    throw ConfigError("n_adapt must lie in [1, train range size]");
  }
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
}

// RUNTIME: same-runtime devices minus the test device. COMBINED: every other
// device. SINGLE_DEVICE_LOOCV: the candidate single trainers (same runtime),
// or just `training_device` when it is set.
inline std::vector<std::string> build_training_pool(const MeasurementDataset& ds, const ExperimentConfig& c) {
  const DeviceRecord& test = ds.device(c.test_device_id);
  std::vector<std::string> pool;
  for (const auto& d : ds.devices) {
    if (d.device_id == test.device_id) continue;
    if (c.pooling == Pooling::kCombined || d.runtime == test.runtime) pool.push_back(d.device_id);
  }
  if (c.pooling == Pooling::kSingleDeviceLoocv && !c.training_device.empty()) {
    if (std::find(pool.begin(), pool.end(), c.training_device) == pool.end()) {
      throw ConfigError("training device '" + c.training_device + "' is not a same-runtime peer of '" +
                        c.test_device_id + "'");
    }
    pool = {c.training_device};
  }
  if (pool.empty()) {
    throw ConfigError("training pool for '" + c.test_device_id + "' with " + std::string(pooling_name(c.pooling)) +
                      " pooling is empty");
  }
  return pool;
}

inline std::uint64_t trial_seed(std::uint64_t root, int trial) {
  return derive_seed(root, static_cast<std::uint64_t>(trial), "trial");
}

// Adaptation indices for one trial. Targeted uniform ranks the pool devices'
// training-range latencies; the unseen device's own table is never read.
inline AdaptationSet select_adaptation(const LatencyTable& table, const std::vector<std::string>& pool,
                                       const std::vector<std::uint32_t>& train_archs,
                                       const ExperimentConfig& c, SamplingStrategy strategy, int trial) {
  const std::uint64_t seed = trial_seed(c.seed, trial);
  const auto n = static_cast<std::size_t>(c.n_adapt);
  AdaptationSet set;
  if (strategy == SamplingStrategy::kTargetedUniform) {
    DeviceLatencies lat;
    for (const auto& id : pool) {
      auto& rows = lat[id];
      for (auto a : train_archs) rows.emplace_back(a, table.at(id, a));
    }
    set = targeted_uniform_sample(lat, n, seed);
  } else {
    set = random_sample(train_archs, n, seed);
  }
  set.device_id = c.test_device_id;
  return set;
}

// T = initial rows (pool devices x training range) plus the adaptation rows
// measured on the test device, each cloned up to k copies.
inline std::vector<TrainingRow> assemble_training_rows(const MeasurementDataset& ds, const LatencyTable& table,
                                                       const std::vector<std::string>& pool,
                                                       const std::vector<std::uint32_t>& train_archs,
                                                       const std::string& test_device,
                                                       const std::vector<std::uint32_t>& adaptation, int k,
                                                       DescriptorKind kind) {
  std::vector<TrainingRow> rows;
  rows.reserve(pool.size() * train_archs.size() + adaptation.size() * static_cast<std::size_t>(k));
  for (const auto& id : pool) {
    const HardwareDescriptor desc = ds.device(id).descriptor_of(kind);
    for (auto a : train_archs) rows.push_back(make_row(architecture_from_index(a), desc, table.at(id, a)));
  }
  const HardwareDescriptor test_desc = ds.device(test_device).descriptor_of(kind);
  std::vector<TrainingRow> adapt;
  for (auto a : adaptation) {
    adapt.push_back(make_row(architecture_from_index(a), test_desc, table.at(test_device, a), RowSource::kAdaptation));
  }
  for (auto& r : augment(adapt, k)) rows.push_back(std::move(r));
  return rows;
}

namespace detail {

inline std::string join(const std::vector<std::string>& xs, char sep = ',') {
  std::string s;
  for (const auto& x : xs) {
    if (!s.empty()) s += sep;
    s += x;
  }
  return s;
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  for (int w = 0; w < std::min(jobs, n); ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<PredictionPair> score_pairs(const std::vector<std::uint32_t>& archs,
                                               const std::vector<double>& predicted, const LatencyTable& table,
                                               const std::string& device) {
  std::vector<PredictionPair> pairs;
  pairs.reserve(archs.size());
  for (std::size_t i = 0; i < archs.size(); ++i) pairs.push_back({archs[i], predicted[i], table.at(device, archs[i])});
  return pairs;
}

struct TrialOutput {
  TrialResult result;
  std::vector<PredictionPair> pairs;
};

inline TrialOutput run_trial(const MeasurementDataset& ds, const LatencyTable& table, const ExperimentConfig& c,
                             const std::vector<std::string>& pool, const std::vector<std::uint32_t>& train_archs,
                             const std::vector<std::uint32_t>& test_archs, int trial) {
  const MethodSettings s = effective_settings(c);
  const AdaptationSet adapt = select_adaptation(table, pool, train_archs, c, s.strategy, trial);
  const auto rows = assemble_training_rows(ds, table, pool, train_archs, c.test_device_id, adapt.arch_indices,
                                           s.k_augment, s.normalization);
  TrainConfig tc = c.training;
  tc.seed = derive_seed(trial_seed(c.seed, trial), 0, "train");
  TrainOutcome trained = train_with_summary(rows, tc);
  trained.model.descriptor_kind = s.normalization;
  const auto predicted =
      predict_many(trained.model, test_archs, ds.device(c.test_device_id).descriptor_of(s.normalization));
  TrialOutput out;
  out.pairs = score_pairs(test_archs, predicted, table, c.test_device_id);
  out.result = {join(pool), adapt.arch_indices, bound_accuracy(out.pairs), trained.final_log_mse};
  return out;
}

}  // namespace detail

inline double lut_overhead_for(const MeasurementDataset& ds, const LatencyTable& table, const std::string& device,
                               const std::vector<std::uint32_t>& train_archs) {
  if (auto zero = table.find(device, 0)) return *zero;
  double fastest = 0.0;
  bool any = false;
  for (auto a : train_archs) {
    if (auto v = table.find(device, a)) {
      fastest = any ? std::min(fastest, *v) : *v;
      any = true;
    }
  }
  if (!any) return lut_overhead_from_samples(ds, device);
  return fastest;
}

inline EvalReport run_experiment(const MeasurementDataset& ds, const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  validate_experiment(ds, c);
  const LatencyTable table(ds);
  const auto train_archs = arch_indices_in(c.train_range, c.ordering);
  const auto test_archs = arch_indices_in(c.test_range, c.ordering);

  EvalReport rep;
  rep.config = c;

  if (c.method == Method::kLut) {
    const DeviceRecord& dev = ds.device(c.test_device_id);
    const double overhead = lut_overhead_for(ds, table, dev.device_id, train_archs);
    const LatencyLUT lut = lut_from_descriptor(dev.descriptor, overhead);
    std::vector<double> predicted;
    predicted.reserve(test_archs.size());
    for (auto a : test_archs) predicted.push_back(lut_predict(lut, architecture_from_index(a), dev.macro));
    rep.last_trial_pairs = detail::score_pairs(test_archs, predicted, table, dev.device_id);
    rep.trials.push_back({"", {}, bound_accuracy(rep.last_trial_pairs), 0.0});
  } else {
    std::vector<std::vector<std::string>> pools;
    const auto pool = build_training_pool(ds, c);
    if (c.pooling == Pooling::kSingleDeviceLoocv) {
      for (const auto& d : pool) pools.push_back({d});
    } else {
      pools.push_back(pool);
    }
    const int per_pool = c.n_trials;
    const int total = per_pool * static_cast<int>(pools.size());
    std::vector<detail::TrialOutput> outputs(static_cast<std::size_t>(total));
    detail::parallel_for(total, c.jobs, [&](int i) {
      const auto& p = pools[static_cast<std::size_t>(i / per_pool)];
      outputs[static_cast<std::size_t>(i)] = detail::run_trial(ds, table, c, p, train_archs, test_archs, i % per_pool);
    });
    for (auto& o : outputs) rep.trials.push_back(std::move(o.result));
    rep.last_trial_pairs = std::move(outputs.back().pairs);
  }
  std::tie(rep.mean_accuracy, rep.stddev_accuracy) = mean_stddev(rep.accuracies());
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationRow {
  Pooling pooling = Pooling::kRuntime;
  std::string label;
  MethodSettings settings{};
  EvalReport report;
  double delta_vs_baseline = 0.0;
};

struct AblationTable {
  std::string test_device_id;
  std::vector<AblationRow> rows;
};

// The four cumulative rows per pooling mode: baseline, + targeted uniform,
// + normalization, + augmentation. All rows share seeds and budgets.
inline std::vector<std::pair<std::string, MethodSettings>> ablation_stack_rows(int k_augment) {
  using S = SamplingStrategy;
  using D = DescriptorKind;
  return {{"maple*", {S::kRandom, D::kRaw, 1}},
          {"maple*+tu", {S::kTargetedUniform, D::kRaw, 1}},
          {"maple*+tu+norm", {S::kTargetedUniform, D::kNormalized, 1}},
          {"maple*+tu+norm+aug", {S::kTargetedUniform, D::kNormalized, k_augment}}};
}

inline AblationTable run_ablation_stack(const MeasurementDataset& ds, const ExperimentConfig& base,
                                        const std::vector<Pooling>& poolings = {Pooling::kRuntime,
                                                                                Pooling::kCombined}) {
  AblationTable table{base.test_device_id, {}};
  for (Pooling p : poolings) {
    double baseline = 0.0;
    for (const auto& [label, s] : ablation_stack_rows(base.k_augment)) {
      ExperimentConfig c = base;
      c.pooling = p;
      c.method = Method::kMapleEdge;
      c.strategy = s.strategy;
      c.normalization = s.normalization;
      c.k_augment = s.k_augment;
      AblationRow row{p, label, s, run_experiment(ds, c), 0.0};
      if (table.rows.empty() || table.rows.back().pooling != p) baseline = row.report.mean_accuracy;
      row.delta_vs_baseline = row.report.mean_accuracy - baseline;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

struct SweepGrid {
  std::string test_device_id;
  std::vector<int> n_values;
  std::vector<int> k_values;
  std::vector<std::vector<double>> mean;    // [n][k]
  std::vector<std::vector<double>> stddev;  // [n][k]
};

inline SweepGrid run_adaptation_sweep(const MeasurementDataset& ds, const ExperimentConfig& base,
                                      const std::vector<int>& n_values, const std::vector<int>& k_values) {
  if (n_values.empty() || k_values.empty()) throw ConfigError("sweep needs at least one n and one k value");
  for (int n : n_values) {
    if (n < 1 || static_cast<std::size_t>(n) > base.train_range.size()) {
      throw ConfigError("sweep n=" + std::to_string(n) + " outside [1, train range size]");
    }
  }
  SweepGrid g{base.test_device_id, n_values, k_values, {}, {}};
  for (int n : n_values) {
    g.mean.emplace_back();
    g.stddev.emplace_back();
    for (int k : k_values) {
      ExperimentConfig c = base;
      c.method = Method::kMapleEdge;
      c.n_adapt = n;
      c.k_augment = k;
      const EvalReport r = run_experiment(ds, c);
      g.mean.back().push_back(r.mean_accuracy);
      g.stddev.back().push_back(r.stddev_accuracy);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Report output. Files exclude wall time so reruns are byte-identical.

inline constexpr std::string_view kReportHeader = "edgelat-report v1";

inline std::string range_text(const ArchRange& r) { return std::to_string(r.lo) + ".." + std::to_string(r.hi); }

inline std::string config_line(const ExperimentConfig& c) {
  const MethodSettings s = effective_settings(c);
  std::ostringstream os;
  os << "test_device=" << c.test_device_id << " method=" << method_name(c.method)
     << " pooling=" << pooling_name(c.pooling) << " strategy=" << strategy_name(s.strategy)
     << " normalization=" << descriptor_kind_name(s.normalization) << " n_adapt=" << c.n_adapt
     << " k_augment=" << s.k_augment << " n_trials=" << c.n_trials << " train_range=" << range_text(c.train_range)
     << " test_range=" << range_text(c.test_range) << " ordering=" << ordering_name(c.ordering)
     << " epochs=" << c.training.epochs << " batch_size=" << c.training.batch_size
     << " learning_rate=" << format_real(c.training.learning_rate)
     << " weight_decay=" << format_real(c.training.weight_decay);
  if (!c.training_device.empty()) os << " training_device=" << c.training_device;
  return os.str();
}

inline void write_report_block(std::ostream& os, const EvalReport& r, bool with_pairs = true) {
  os << "experiment " << config_line(r.config) << '\n';
  for (std::size_t t = 0; t < r.trials.size(); ++t) {
    const auto& tr = r.trials[t];
    os << "trial " << t << " accuracy=" << format_real(tr.accuracy);
    if (!tr.training_pool.empty()) os << " pool=" << tr.training_pool;
    if (!tr.adaptation.empty()) {
      os << " adaptation=";
      for (std::size_t i = 0; i < tr.adaptation.size(); ++i) os << (i ? "," : "") << tr.adaptation[i];
    }
    os << '\n';
  }
  os << "summary mean=" << format_real(r.mean_accuracy) << " stddev=" << format_real(r.stddev_accuracy) << '\n';
  if (with_pairs) {
    for (const auto& p : r.last_trial_pairs) {
      os << "pair " << p.arch_index << ' ' << format_real(p.predicted_s) << ' ' << format_real(p.true_s) << '\n';
    }
  }
}

inline void write_report_file_header(std::ostream& os, std::uint64_t seed) {
  os << kReportHeader << '\n' << "seed " << seed << '\n';
}

inline void write_ablation(std::ostream& os, const AblationTable& t) {
  for (const auto& row : t.rows) {
    os << "ablation pooling=" << pooling_name(row.pooling) << " row=" << row.label
       << " mean=" << format_real(row.report.mean_accuracy) << " stddev=" << format_real(row.report.stddev_accuracy)
       << " delta=" << format_real(row.delta_vs_baseline) << '\n';
  }
  for (const auto& row : t.rows) write_report_block(os, row.report, false);
}

inline void write_sweep(std::ostream& os, const SweepGrid& g) {
  for (std::size_t i = 0; i < g.n_values.size(); ++i) {
    for (std::size_t j = 0; j < g.k_values.size(); ++j) {
      os << "sweep test_device=" << g.test_device_id << " n=" << g.n_values[i] << " k=" << g.k_values[j]
         << " mean=" << format_real(g.mean[i][j]) << " stddev=" << format_real(g.stddev[i][j]) << '\n';
    }
  }
}

inline void write_pairs_csv(std::ostream& os, const std::vector<PredictionPair>& pairs) {
  os << "arch_index,predicted_s,true_s\n";
  for (const auto& p : pairs) os << p.arch_index << ',' << format_real(p.predicted_s) << ',' << format_real(p.true_s) << '\n';
}

// Aligned-column summary tables for standard output.
inline void print_report_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  os << std::left << std::setw(16) << "test_device" << std::setw(12) << "method" << std::setw(21) << "pooling"
     << std::right << std::setw(8) << "trials" << std::setw(10) << "mean%" << std::setw(10) << "stddev" << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(16) << r.config.test_device_id << std::setw(12) << method_name(r.config.method)
       << std::setw(21) << (r.config.method == Method::kLut ? "-" : pooling_name(r.config.pooling)) << std::right
       << std::setw(8) << r.trials.size() << std::setw(10) << std::fixed << std::setprecision(2) << r.mean_accuracy
       << std::setw(10) << r.stddev_accuracy << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

inline void print_ablation_table(std::ostream& os, const AblationTable& t) {
  os << "test device: " << t.test_device_id << '\n';
  os << std::left << std::setw(12) << "pooling" << std::setw(22) << "row" << std::right << std::setw(10) << "mean%"
     << std::setw(10) << "stddev" << std::setw(10) << "delta" << '\n';
  for (const auto& row : t.rows) {
    os << std::left << std::setw(12) << pooling_name(row.pooling) << std::setw(22) << row.label << std::right
       << std::fixed << std::setprecision(2) << std::setw(10) << row.report.mean_accuracy << std::setw(10)
       << row.report.stddev_accuracy << std::setw(10) << std::showpos << row.delta_vs_baseline << std::noshowpos
       << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

inline void print_sweep_table(std::ostream& os, const SweepGrid& g) {
  os << "test device: " << g.test_device_id << "  (rows: n adaptation samples, columns: augmentation factor K)\n";
  os << std::setw(8) << "n \\ K";
  for (int k : g.k_values) os << std::setw(10) << k;
  os << '\n';
  for (std::size_t i = 0; i < g.n_values.size(); ++i) {
    os << std::setw(8) << g.n_values[i];
    for (std::size_t j = 0; j < g.k_values.size(); ++j) {
      os << std::setw(10) << std::fixed << std::setprecision(2) << g.mean[i][j];
    }
    os << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

}  // namespace edgelat
