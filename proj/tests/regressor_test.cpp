#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "edgelat/dataset.hpp"
#include "edgelat/errors.hpp"
#include "edgelat/random.hpp"
#include "edgelat/regressor.hpp"
#include "edgelat/sampler.hpp"

using namespace edgelat;

namespace {

HardwareDescriptor toy_descriptor(double scale) {
  HardwareDescriptor d;
  d.device_id = "toy";
  for (std::size_t i = 0; i < kDescriptorSize; ++i) d.values[i] = scale * (1.0 + static_cast<double>(i % 7));
  return d;
}

std::vector<TrainingRow> toy_rows(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = architecture_from_index(static_cast<std::int64_t>(rng.below(kNumArchitectures)));
    const double scale = i % 2 == 0 ? 1.0 : 3.0;
    rows.push_back(make_row(a, toy_descriptor(scale), rng.log_uniform(0.01, 1.0)));
  }
  return rows;
}

struct SingleDevice {
  MeasurementDataset ds;
  std::vector<TrainingRow> rows;
};

const SingleDevice& single_device() {
  static const SingleDevice s = [] {
    auto spec = default_pool_spec();
    spec.devices = {spec.devices[1]};
    SingleDevice out;
    out.ds = generate_dataset(make_device_pool(spec, 8), {0, 899}, spec.macro);
    const auto& dev = out.ds.devices.front();
    for (const auto& smp : out.ds.samples) {
      out.rows.push_back(make_row(architecture_from_index(smp.arch_index), dev.descriptor, smp.latency_s));
    }
    return out;
  }();
  return s;
}

}  // namespace

TEST(Model, ShapeAndParameterCount) {
  const auto m = init_model(kFeatureSize, TrainConfig{});
  EXPECT_EQ(m.layer_sizes, (std::vector<int>{135, 128, 128, 1}));
  EXPECT_EQ(m.parameter_count(), 135u * 128 + 128 + 128 * 128 + 128 + 128 + 1);
  EXPECT_EQ(m.layers[0].weight.rows(), 128);
  EXPECT_EQ(m.layers[0].weight.cols(), 135);
}

TEST(Model, GlorotBounds) {
  const auto m = init_model(kFeatureSize, TrainConfig{});
  for (const auto& l : m.layers) {
    const double lim = std::sqrt(6.0 / static_cast<double>(l.weight.rows() + l.weight.cols()));
    EXPECT_LE(l.weight.cwiseAbs().maxCoeff(), lim);
    EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Train, OverfitsTenRows) {
  const auto rows = toy_rows(10, 1);
  TrainConfig cfg;
  cfg.seed = 2;
  const auto out = train_with_summary(rows, cfg);
  EXPECT_LE(out.final_log_mse, 1e-3);
}

TEST(Train, Deterministic) {
  const auto rows = toy_rows(50, 3);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 4;
  EXPECT_EQ(train(rows, cfg), train(rows, cfg));
  cfg.seed = 5;
  const auto other = train(rows, cfg);
  cfg.seed = 4;
  EXPECT_NE(train(rows, cfg), other);
}

TEST(Train, Errors) {
  EXPECT_THROW(train({}, TrainConfig{}), StructuralError);
  auto rows = toy_rows(3, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(rows, cfg), RangeError);
  cfg.epochs = 1;
  rows[1].features.pop_back();
  EXPECT_THROW(train(rows, cfg), StructuralError);
  rows = toy_rows(3, 1);
  rows[2].target = std::nan("");
  EXPECT_THROW(train(rows, cfg), DataError);
}

TEST(Loss, WeightSevenEqualsSevenClones) {
  auto rows = toy_rows(6, 9);
  const auto m = init_model(kFeatureSize, TrainConfig{});
  auto weighted = rows;
  weighted[2].weight = 7.0;
  auto cloned = rows;
  for (int i = 0; i < 6; ++i) cloned.push_back(rows[2]);

  // Same standardization on both sides so only the loss weighting differs.
  RegressionModel a = m;
  detail::fit_standardization(a, weighted);
  RegressionModel b = a;
  const auto ga = loss_gradient(a, weighted);
  const auto gb = loss_gradient(b, cloned);
  ASSERT_EQ(ga.size(), gb.size());
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], gb[i], 1e-12 * std::max(1.0, std::abs(ga[i])));

  RegressionModel c = m;
  detail::fit_standardization(c, cloned);
  EXPECT_TRUE(c.feature_mean.isApprox(a.feature_mean, 1e-12));
  EXPECT_NEAR(c.target_scale, a.target_scale, 1e-12);
}

TEST(GradientCheck, FreshModelEightRows) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    TrainConfig cfg;
    cfg.seed = s;
    auto m = init_model(kFeatureSize, cfg);
    const auto rows = toy_rows(8, 100 + s);
    detail::fit_standardization(m, rows);
    const auto rep = gradient_check(m, rows, 1e-4, 64, s);
    EXPECT_TRUE(rep.passed) << "max rel " << rep.max_relative_error;
    EXPECT_EQ(rep.checked, 64u);
  }
}

TEST(GradientCheck, TrainedModel) {
  const auto rows = toy_rows(40, 7);
  TrainConfig cfg;
  cfg.epochs = 30;
  const auto m = train(rows, cfg);
  const auto rep = gradient_check(m, rows, 1e-4, 128, 1);
  EXPECT_TRUE(rep.passed) << "max rel " << rep.max_relative_error;
}

TEST(GradientCheck, ZeroWeightModelOutputBias) {
  auto m = init_model(kFeatureSize, TrainConfig{});
  const auto rows = toy_rows(8, 4);
  detail::fit_standardization(m, rows);
  for (auto& l : m.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const auto g = loss_gradient(m, rows);
  const std::size_t out_bias = m.parameter_count() - 1;
  for (std::size_t k = 0; k < out_bias; ++k) ASSERT_EQ(g[k], 0.0) << k;

  double expect = 0.0;
  for (const auto& r : rows) expect += 2.0 * (0.0 - (r.target - m.target_mean) / m.target_scale);
  expect /= static_cast<double>(rows.size());
  EXPECT_NEAR(g[out_bias], expect, 1e-12);

  const auto rep = gradient_check(m, rows, 1e-9, m.parameter_count(), 0);
  EXPECT_TRUE(rep.passed) << rep.max_relative_error;
}

TEST(GradientCheck, ZeroToleranceFails) {
  auto m = init_model(kFeatureSize, TrainConfig{});
  const auto rows = toy_rows(8, 5);
  detail::fit_standardization(m, rows);
  EXPECT_FALSE(gradient_check(m, rows, 0.0).passed);
}

TEST(Predict, FitsTrainingDevice) {
  const auto& s = single_device();
  TrainConfig cfg;
  cfg.seed = 1;
  const auto m = train(s.rows, cfg);
  std::size_t ok = 0;
  for (const auto& r : s.rows) {
    const double truth = std::exp(r.target);
    const double p = predict(m, architecture_from_index(r.arch_index), s.ds.devices.front().descriptor);
    if (std::abs(p - truth) <= 0.1 * truth) ++ok;
  }
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(s.rows.size()), 0.95);
}

TEST(Predict, PositiveFiniteEverywhereAndPure) {
  const auto rows = toy_rows(30, 8);
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto m = train(rows, cfg);
  std::vector<std::uint32_t> all(kNumArchitectures);
  for (std::uint32_t i = 0; i < kNumArchitectures; ++i) all[i] = i;
  const auto p = predict_many(m, all, toy_descriptor(1.0));
  for (double x : p) {
    ASSERT_TRUE(std::isfinite(x));
    ASSERT_GT(x, 0.0);
  }
  const auto a = architecture_from_index(77);
  EXPECT_EQ(predict(m, a, toy_descriptor(1.0)), predict(m, a, toy_descriptor(1.0)));
  EXPECT_NEAR(predict(m, a, toy_descriptor(1.0)), p[77], 1e-12 * p[77]);
}

TEST(Predict, WrongDescriptorLength) {
  const auto m = init_model(kFeatureSize, TrainConfig{});
  HardwareDescriptor d;
  d.values.resize(7);
  EXPECT_THROW(predict(m, architecture_from_index(0), d), StructuralError);
}

TEST(Persistence, SaveLoadBitIdentical) {
  const auto rows = toy_rows(40, 11);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 77;
  const auto m = train(rows, cfg);
  std::stringstream ss;
  write_model(ss, m);
  const auto text = ss.str();
  const auto back = read_model(ss);
  EXPECT_EQ(back, m);
  for (std::uint32_t i = 0; i < kNumArchitectures; i += 101) {
    const auto a = architecture_from_index(i);
    ASSERT_EQ(predict(back, a, toy_descriptor(3.0)), predict(m, a, toy_descriptor(3.0)));
  }
  std::ostringstream again;
  write_model(again, back);
  EXPECT_EQ(again.str(), text);

  const auto path = (std::filesystem::temp_directory_path() / "edgelat_model_test.txt").string();
  save_model(m, path);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove(path);
}

TEST(Persistence, RejectsGarbage) {
  std::istringstream bad("edgelat-model v9\n");
  EXPECT_THROW(read_model(bad), ParseError);
  std::istringstream truncated("edgelat-model v1\nseed 1\n");
  EXPECT_THROW(read_model(truncated), ParseError);
}
