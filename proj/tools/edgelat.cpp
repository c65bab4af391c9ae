#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "edgelat/config.hpp"
#include "edgelat/edgelat.hpp"

using namespace edgelat;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct Common {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config_path, "JSON configuration document")->check(CLI::ExistingFile);
  if (with_out) cmd->add_option("--out", c.out, "output path");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&c](const std::uint64_t& s) {
        c.seed = s;
        c.seed_set = true;
      },
      "root seed (overrides config)");
  cmd->add_option("--jobs", c.jobs, "parallel trials")->check(CLI::PositiveNumber);
}

CliConfig resolve(const Common& c) {
  CliConfig cfg = c.config_path.empty() ? CliConfig{} : load_config(c.config_path);
  if (c.seed_set) cfg.seed = c.seed;
  cfg.experiment.seed = cfg.seed;
  cfg.experiment.jobs = c.jobs;
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw Error("write to '" + path + "' failed");
}

void print_dataset_summary(const MeasurementDataset& ds) {
  std::map<std::string, std::pair<double, std::size_t>> stats;
  for (const auto& s : ds.samples) {
    stats[s.device_id].first += s.latency_s;
    ++stats[s.device_id].second;
  }
  std::cout << std::left << std::setw(16) << "device" << std::setw(12) << "runtime" << std::right << std::setw(10)
            << "samples" << std::setw(16) << "mean_latency_s" << '\n';
  for (const auto& d : ds.devices) {
    const auto [sum, n] = stats[d.device_id];
    std::cout << std::left << std::setw(16) << d.device_id << std::setw(12) << runtime_name(d.runtime) << std::right
              << std::setw(10) << n << std::setw(16) << std::setprecision(6) << (n ? sum / n : 0.0) << '\n';
  }
}

std::vector<std::uint32_t> parse_arch_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string tok = text.substr(pos, end - pos);
    const auto dots = tok.find("..");
    auto num = [&](const std::string& s) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("bad architecture index '" + s + "'");
      return v;
    };
    if (dots == std::string::npos) {
      out.push_back(architecture_from_index(num(tok)).index);
    } else {
      const std::int64_t lo = num(tok.substr(0, dots));
      const std::int64_t hi = num(tok.substr(dots + 2));
      validate_range({lo, hi});
      for (std::int64_t i = lo; i <= hi; ++i) out.push_back(static_cast<std::uint32_t>(i));
    }
    pos = end + 1;
  }
  return out;
}

int cmd_gen_pool(const Common& c) {
  const CliConfig cfg = resolve(c);
  const auto pool = make_device_pool(cfg.pool, cfg.seed);
  const auto ds = generate_dataset(pool, cfg.pool_range, cfg.pool.macro, cfg.pool.ordering);
  print_dataset_summary(ds);
  if (!c.out.empty()) {
    export_dataset(ds, c.out);
    std::cout << "wrote " << c.out << '\n';
  }
  return 0;
}

int cmd_import(const std::string& path, const Common& c) {
  const auto ds = import_dataset(path);
  validate_dataset(ds);
  print_dataset_summary(ds);
  if (!c.out.empty()) export_dataset(ds, c.out);
  return 0;
}

int cmd_train(const std::string& dataset, const std::string& test_device, const Common& c) {
  CliConfig cfg = resolve(c);
  if (!test_device.empty()) cfg.experiment.test_device_id = test_device;
  ExperimentConfig e = cfg.experiment;
  if (e.test_device_id.empty()) throw ConfigError("missing required key 'experiment.test_device'");
  if (c.out.empty()) throw ConfigError("train needs --out <model path>");
  const auto ds = import_dataset(dataset);
  validate_experiment(ds, e);
  if (e.pooling == Pooling::kSingleDeviceLoocv && e.training_device.empty()) {
    throw ConfigError("single_device_loocv training needs 'experiment.training_device'");
  }
  const LatencyTable table(ds);
  const auto pool = build_training_pool(ds, e);
  const auto train_archs = arch_indices_in(e.train_range, e.ordering);
  const MethodSettings s = effective_settings(e);
  const auto adapt = select_adaptation(table, pool, train_archs, e, s.strategy, 0);
  const auto rows =
      assemble_training_rows(ds, table, pool, train_archs, e.test_device_id, adapt.arch_indices, s.k_augment,
                             s.normalization);
  TrainConfig tc = e.training;
  tc.seed = derive_seed(trial_seed(e.seed, 0), 0, "train");
  auto out = train_with_summary(rows, tc);
  out.model.descriptor_kind = s.normalization;
  save_model(out.model, c.out);
  std::cout << "pool " << detail::join(pool) << "\nrows " << rows.size() << "\nfinal_log_mse "
            << format_real(out.final_log_mse) << "\nwall_seconds " << std::fixed << std::setprecision(2)
            << out.wall_seconds << "\nwrote " << c.out << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& dataset, const std::string& device,
                const std::string& archs, const std::string& positions, const Common& c) {
  const auto model = load_model(model_path);
  const auto ds = import_dataset(dataset);
  const DeviceRecord& dev = ds.device(device);
  std::vector<std::uint32_t> indices;
  if (positions.empty()) {
    indices = parse_arch_list(archs);
  } else {
    const CliConfig cfg = resolve(c);
    for (auto p : parse_arch_list(positions)) indices.push_back(arch_index_at(p, cfg.experiment.ordering));
  }
  const auto pred = predict_many(model, indices, dev.descriptor_of(model.descriptor_kind));
  const LatencyTable table(ds);
  std::ostringstream os;
  os << "arch_index,predicted_s,true_s,within_bound\n";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    os << indices[i] << ',' << format_real(pred[i]);
    if (auto t = table.find(device, indices[i])) {
      os << ',' << format_real(*t) << ',' << (within_bound(pred[i], *t) ? 1 : 0);
    } else {
      os << ",,";
    }
    os << '\n';
  }
  if (c.out.empty()) {
    std::cout << os.str();
  } else {
    write_file(c.out, os.str());
    std::cout << indices.size() << " predictions written to " << c.out << '\n';
  }
  return 0;
}

ExperimentConfig with_test_device(const CliConfig& cfg, const std::string& test_device) {
  ExperimentConfig e = cfg.experiment;
  if (!test_device.empty()) e.test_device_id = test_device;
  if (e.test_device_id.empty()) throw ConfigError("missing required key 'experiment.test_device'");
  return e;
}

int cmd_evaluate(const std::string& dataset, const std::string& test_device, const std::string& pairs_csv,
                 const Common& c) {
  const CliConfig cfg = resolve(c);
  const ExperimentConfig base = with_test_device(cfg, test_device);
  const auto ds = import_dataset(dataset);
  std::vector<EvalReport> reports;
  for (Method m : cfg.methods) {
    ExperimentConfig e = base;
    e.method = m;
    reports.push_back(run_experiment(ds, e));
  }
  print_report_table(std::cout, reports);
  std::ostringstream os;
  write_report_file_header(os, cfg.seed);
  for (const auto& r : reports) write_report_block(os, r);
  if (!c.out.empty()) write_file(c.out, os.str());
  if (!pairs_csv.empty()) {
    std::ostringstream csv;
    write_pairs_csv(csv, reports.back().last_trial_pairs);
    write_file(pairs_csv, csv.str());
  }
  return 0;
}

int cmd_ablate(const std::string& dataset, const std::string& test_device, const Common& c) {
  const CliConfig cfg = resolve(c);
  const ExperimentConfig base = with_test_device(cfg, test_device);
  const auto ds = import_dataset(dataset);
  const auto table = run_ablation_stack(ds, base, cfg.ablation_poolings);
  print_ablation_table(std::cout, table);
  std::ostringstream os;
  write_report_file_header(os, cfg.seed);
  write_ablation(os, table);
  if (!c.out.empty()) write_file(c.out, os.str());
  return 0;
}

int cmd_sweep(const std::string& dataset, const std::string& test_device, const Common& c) {
  const CliConfig cfg = resolve(c);
  const ExperimentConfig base = with_test_device(cfg, test_device);
  const auto ds = import_dataset(dataset);
  const auto grid = run_adaptation_sweep(ds, base, cfg.sweep_n, cfg.sweep_k);
  print_sweep_table(std::cout, grid);
  std::ostringstream os;
  write_report_file_header(os, cfg.seed);
  write_sweep(os, grid);
  if (!c.out.empty()) write_file(c.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardware-aware latency prediction for edge devices"};
  app.require_subcommand(1);

  Common common;
  std::string dataset, model, device, archs = "0", positions, import_path, pairs_csv;

  auto* gen = app.add_subcommand("gen-pool", "generate a synthetic device pool and its measurement dataset");
  add_common(gen, common);

  auto* imp = app.add_subcommand("import", "validate an external dataset file and print its summary");
  imp->add_option("path", import_path, "dataset file")->required();
  add_common(imp, common);

  auto* trn = app.add_subcommand("train", "train one predictor for the configured test device");
  trn->add_option("--dataset", dataset, "dataset file")->required();
  trn->add_option("--test-device", device, "unseen device (overrides config)");
  add_common(trn, common);

  auto* prd = app.add_subcommand("predict", "predict latencies with a saved model");
  prd->add_option("--model", model, "model file")->required();
  prd->add_option("--dataset", dataset, "dataset with the device descriptor")->required();
  prd->add_option("--device", device, "device id")->required();
  prd->add_option("--archs", archs, "indices, e.g. 0,7,100..199");
  prd->add_option("--positions", positions, "positions in the experiment ordering, e.g. 1800..2699")
      ->excludes("--archs");
  add_common(prd, common);

  auto* evl = app.add_subcommand("evaluate", "run the evaluation protocol for each configured method");
  evl->add_option("--dataset", dataset, "dataset file")->required();
  evl->add_option("--test-device", device, "unseen device (overrides config)");
  evl->add_option("--pairs-csv", pairs_csv, "write the last trial's predictions as CSV");
  add_common(evl, common);

  auto* abl = app.add_subcommand("ablate", "sampling / normalization / augmentation ablation stack");
  abl->add_option("--dataset", dataset, "dataset file")->required();
  abl->add_option("--test-device", device, "unseen device (overrides config)");
  add_common(abl, common);

  auto* swp = app.add_subcommand("sweep", "adaptation-count x augmentation-factor grid");
  swp->add_option("--dataset", dataset, "dataset file")->required();
  swp->add_option("--test-device", device, "unseen device (overrides config)");
  add_common(swp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_pool(common);
    if (imp->parsed()) return cmd_import(import_path, common);
    if (trn->parsed()) return cmd_train(dataset, device, common);
    if (prd->parsed()) return cmd_predict(model, dataset, device, archs, positions, common);
    if (evl->parsed()) return cmd_evaluate(dataset, device, pairs_csv, common);
    if (abl->parsed()) return cmd_ablate(dataset, device, common);
    if (swp->parsed()) return cmd_sweep(dataset, device, common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
