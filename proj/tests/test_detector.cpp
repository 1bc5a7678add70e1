#include <doctest.h>

#include <numbers>

#include "edsim/detector.hpp"
#include "edsim/experiments.hpp"
#include "oracles.hpp"

using namespace edsim;

TEST_CASE("channelize of zero input is zero everywhere") {
  const auto plan = ChannelPlan::with_bins(6, 32);
  const Baseband zero{Eigen::VectorXcd::Zero(plan.dft_size()), 1.0};
  const auto e = channelize(zero, plan);
  CHECK(e.values.isZero(0.0));
  CHECK(e.channels == plan.channels());
}

TEST_CASE("single-bin tone lands in its channel with T = P N / B") {
  const auto plan = ChannelPlan::with_bins(4, 15);  // N = 64, B = 15
  const int n = plan.dft_size();
  const int bin = plan.bins(1)[7];
  const double amplitude = 0.7;
  Baseband x{Eigen::VectorXcd(n), 1.0};
  for (int t = 0; t < n; ++t) x.samples[t] = std::polar(amplitude, 2.0 * std::numbers::pi * bin * t / n);
  const double p = amplitude * amplitude;
  const auto e = channelize(x, plan);
  // Oracle: naive DFT gives |X[bin]|^2 = P N.
  const Eigen::VectorXcd spec = oracle::naive_dft(x.samples);
  CHECK(std::norm(spec[bin]) == doctest::Approx(p * n));
  CHECK(e.at(1) == doctest::Approx(p * n / plan.bins_per_channel()));
  for (int k : plan.channels())
    if (k != 1) CHECK(e.at(k) < 1e-20);
}

TEST_CASE("channel energies obey Parseval with the guard bins") {
  const auto plan = ChannelPlan::with_bins(6, 32);
  RandomStream rng(4);
  for (int i = 0; i < 20; ++i) {
    const Baseband x{circular_gaussian(plan.dft_size(), 1.3, rng), 1.0};
    const auto e = channelize(x, plan);
    const Eigen::VectorXd bins = oracle::naive_dft(x.samples).cwiseAbs2();
    double guard = 0.0;
    for (int m : plan.guard_bins()) guard += bins[m];
    const double total = e.values.sum() * plan.bins_per_channel() + guard;
    CHECK(total == doctest::Approx(x.samples.squaredNorm()).epsilon(1e-9));
  }
}

TEST_CASE("white-noise energy statistic has mean sigma^2") {
  const auto plan = ChannelPlan::with_bins(6, 16);
  const double sigma2 = 2.5;
  RandomStream rng(10);
  Eigen::MatrixXd t(10000, 6);
  for (Eigen::Index i = 0; i < t.rows(); ++i)
    t.row(i) = channelize({circular_gaussian(plan.dft_size(), sigma2, rng), 1.0}, plan).values.transpose();
  for (Eigen::Index c = 0; c < 6; ++c) {
    const auto st = oracle::mean_stat(t.col(c));
    CHECK(std::abs(st.mean - sigma2) < 3 * st.stderr_);
  }
}

TEST_CASE("channelize rejects a window of the wrong length") {
  const auto plan = ChannelPlan::with_bins(6, 32);
  const Baseband x{Eigen::VectorXcd::Zero(plan.dft_size() - 1), 1.0};
  CHECK_THROWS_AS(channelize(x, plan), std::invalid_argument);
}

TEST_CASE("decide uses a strict comparison") {
  const auto plan = ChannelPlan::with_bins(4, 8);
  EnergyVector e;
  e.channels = plan.channels();
  e.values = Eigen::Vector4d(0.5, 1.0, 1.5, 0.0);
  const auto t = ThresholdVector::uniform(plan, 1.0);
  const auto d = decide(e, t);
  CHECK(d.decisions == std::vector<Decision>{Decision::Idle, Decision::Idle, Decision::Busy, Decision::Idle});

  const auto zero = ThresholdVector::uniform(plan, 0.0);
  RandomStream rng(1);
  const auto noisy = channelize({circular_gaussian(plan.dft_size(), 1.0, rng), 1.0}, plan);
  for (Decision v : decide(noisy, zero).decisions) CHECK(v == Decision::Busy);

  ThresholdVector wrong = ThresholdVector::uniform(ChannelPlan::with_bins(6, 8), 1.0);
  CHECK_THROWS_AS(decide(e, wrong), std::invalid_argument);
}

TEST_CASE("decide is monotone in the threshold") {
  const auto plan = ChannelPlan::with_bins(6, 8);
  RandomStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto e = channelize({circular_gaussian(plan.dft_size(), 1.0, rng), 1.0}, plan);
    ThresholdVector lo = ThresholdVector::uniform(plan, 0.0);
    for (auto& v : lo.values) v = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    ThresholdVector hi = lo;
    hi.values[trial % 6] += std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto a = decide(e, lo), b = decide(e, hi);
    for (std::size_t i = 0; i < a.decisions.size(); ++i)
      if (a.decisions[i] == Decision::Idle) CHECK(b.decisions[i] == Decision::Idle);
  }
}

TEST_CASE("high-SNR busy channel is detected at a noise-level threshold") {
  const auto plan = ChannelPlan::with_bins(6, 32);
  ScenarioConfig cfg{plan, OccupancyMap(plan, {3}), 10.0, 1.0};
  const auto batch = run_trials(cfg, ImpairmentConfig{}, 4000, 5, 1);
  const auto t = ThresholdVector::uniform(plan, 2.0);
  std::size_t busy = 0;
  for (std::size_t i = 0; i < batch.n_trials(); ++i)
    busy += decide(batch.trial(i), t).at(3) == Decision::Busy;
  CHECK(double(busy) / batch.n_trials() > 0.99);
}

TEST_CASE("ideal Pfa/Pd closed forms") {
  CHECK(ideal_pfa(0.0, 1.0, 16) == 1.0);
  CHECK(ideal_pd(0.0, 1.0, 3.0, 16) == 1.0);
  CHECK(ideal_pfa(1e6, 1.0, 16) < 1e-300);
  CHECK(ideal_pfa(std::numeric_limits<double>::infinity(), 1.0, 16) == 0.0);
  for (int b : {1, 4, 16, 32, 64}) {
    for (double lambda : {0.3, 0.9, 1.25, 1.6, 2.4}) {
      CHECK(ideal_pfa(lambda, 1.0, b) == doctest::Approx(oracle::gamma_tail(b, 1.0 / b, lambda)).epsilon(1e-10));
      CHECK(ideal_pd(lambda, 1.0, 0.0, b) == ideal_pfa(lambda, 1.0, b));
      CHECK(ideal_pd(lambda, 1.0, 1.0, b) > ideal_pfa(lambda, 1.0, b));
      CHECK(ideal_pfa(lambda + 0.1, 1.0, b) < ideal_pfa(lambda, 1.0, b));
    }
  }
  CHECK_THROWS_AS(ideal_pfa(1.0, 0.0, 16), std::invalid_argument);
  CHECK_THROWS_AS(ideal_pfa(1.0, 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(ideal_pd(1.0, 1.0, -1.0, 16), std::invalid_argument);
}

TEST_CASE("ideal Pfa matches Monte Carlo noise-only windows") {
  // B = 16, sigma^2 = 1, lambda = 1.25. T ~ Gamma(16, 1/16) sampled directly
  // from |bin|^2 exponentials, which is what the channelizer computes.
  const int b = 16;
  const double lambda = 1.25;
  RandomStream rng(31);
  std::exponential_distribution<double> expo(1.0);
  const std::size_t n = 1'000'000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < b; ++j) s += expo(rng);
    hits += s / b > lambda;
  }
  const double p = double(hits) / n;
  CHECK(std::abs(p - ideal_pfa(lambda, 1.0, b)) < 3 * oracle::prop_stderr(p, n));
}

TEST_CASE("ideal Pd matches Monte Carlo through the full detector") {
  // B = 16, sigma^2 = 1, sigma_s^2 = 1, lambda = 1.6.
  const auto plan = ChannelPlan::with_bins(4, 16);
  ScenarioConfig cfg{plan, OccupancyMap(plan, {-1}), 0.0, 1.0};
  const auto batch = run_trials(cfg, ImpairmentConfig{}, 100000, 12, 1);
  const double p = exceed_fraction(batch, -1, 1.6);
  CHECK(std::abs(p - ideal_pd(1.6, 1.0, 1.0, 16)) < 3 * oracle::prop_stderr(p, batch.n_trials()));
}

TEST_CASE("mirrored occupancy gives exchangeable mirror statistics") {
  const auto plan = ChannelPlan::with_bins(6, 16);
  const auto a = run_trials({plan, OccupancyMap(plan, {2, -3}), 0.0, 1.0}, ImpairmentConfig{}, 4000, 1, 1);
  const auto b = run_trials({plan, OccupancyMap(plan, {-2, 3}), 0.0, 1.0}, ImpairmentConfig{}, 4000, 2, 1);
  for (int k : {1, 2, 3}) {
    const double d = oracle::ks_statistic(oracle::to_std(a.channel(k)), oracle::to_std(b.channel(-k)));
    CHECK(d < oracle::ks_critical_001(4000, 4000));
  }
}
