#include <doctest.h>

#include <numbers>

#include "edsim/detector.hpp"
#include "edsim/rf_frontend.hpp"
#include "oracles.hpp"

using namespace edsim;

namespace {

Baseband gaussian_window(Eigen::Index n, double variance, RandomStream& rng) {
  return {circular_gaussian(n, variance, rng), 1.0};
}

Baseband tone(int n, int bin, double amplitude = 1.0) {
  Baseband x{Eigen::VectorXcd(n), 1.0};
  for (int t = 0; t < n; ++t) x.samples[t] = std::polar(amplitude, 2.0 * std::numbers::pi * bin * t / n);
  return x;
}

double db(double v) { return 10.0 * std::log10(v); }

}  // namespace

TEST_CASE("cubic nonlinearity follows the IIP3 law") {
  NonlinearityParams p{1.0, 1.0};
  CHECK(p.a3() == doctest::Approx(-4.0 / 3.0));
  Baseband x{Eigen::VectorXcd::Constant(1, {1.0, 0.0}), 1.0};
  const Baseband y = apply_nonlinearity(x, p);
  // Scalar evaluation: 1 + (-4/3) * 1 * 1.
  CHECK(y.samples[0].real() == doctest::Approx(-1.0 / 3.0));
  CHECK(y.samples[0].imag() == 0.0);

  NonlinearityParams linear{2.5};
  RandomStream rng(1);
  const Baseband g = gaussian_window(64, 1.0, rng);
  CHECK(apply_nonlinearity(g, linear).samples == (2.5 * g.samples).eval());
  CHECK(apply_nonlinearity(g, NonlinearityParams{}).samples == g.samples);

  CHECK_THROWS_AS(apply_nonlinearity(g, NonlinearityParams{1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_nonlinearity(g, NonlinearityParams{1.0, -3.0}), std::invalid_argument);
}

TEST_CASE("overdrive detection counts samples beyond IIP3/2") {
  Baseband x{Eigen::VectorXcd(3), 1.0};
  x.samples << std::complex<double>{0.1, 0}, std::complex<double>{0.6, 0}, std::complex<double>{0, -2.0};
  CHECK(overdriven_samples(x, NonlinearityParams{1.0, 1.0}) == 2);
  CHECK(overdriven_samples(x, NonlinearityParams{}) == 0);
}

TEST_CASE("nonlinearity raises idle-channel energy") {
  // Gaussian-occupied channel +1, sigma^2 = 0.1 per sample, IIP3 = 10.
  const auto plan = ChannelPlan::with_bins(6, 32);
  ScenarioConfig cfg{plan, OccupancyMap(plan, {1}), 0.0, 1.0};
  const double bin_variance = 0.1 * plan.dft_size() / plan.bins_per_channel();
  cfg.noise_psd = bin_variance;
  const NonlinearityParams p{1.0, 10.0};
  RandomStream rng(4);
  double idle_in = 0, idle_out = 0, busy_in = 0, busy_out = 0;
  for (int t = 0; t < 2000; ++t) {
    const Baseband x = generate_signal(cfg, rng);
    const auto ein = channelize(x, plan);
    const auto eout = channelize(apply_nonlinearity(x, p), plan);
    idle_in += ein.at(2);
    idle_out += eout.at(2);
    busy_in += ein.at(1);
    busy_out += eout.at(1);
  }
  CHECK(idle_in < 1e-20 * busy_in);
  CHECK(idle_out > 1e6 * idle_in);
  CHECK(idle_out > 0.0);
  // Busy channel: output exceeds |alpha|^2 times the input (distortion adds).
  const double power = 0.1;
  const double alpha = std::real(bussgang_gain(p, power));
  CHECK(busy_out > alpha * alpha * busy_in);
}

TEST_CASE("Bussgang gain closed form") {
  CHECK(std::real(bussgang_gain(NonlinearityParams{1.7}, 0.4)) == 1.7);
  CHECK(std::real(bussgang_gain(NonlinearityParams{1.0, 1.0}, 0.3)) == doctest::Approx(0.2));
  CHECK_THROWS_AS(bussgang_gain(NonlinearityParams{1.0, 1.0}, -0.1), std::invalid_argument);
}

TEST_CASE("Bussgang gain matches empirical E[y x*] / E[|x|^2]") {
  const NonlinearityParams p{1.0, 1.0};
  const double sigma2 = 0.3;
  RandomStream rng(8);
  const Baseband x = gaussian_window(1'000'000, sigma2, rng);
  const Baseband y = apply_nonlinearity(x, p);
  const std::complex<double> cross = (y.samples.array() * x.samples.array().conjugate()).sum();
  const double alpha_hat = cross.real() / x.samples.squaredNorm();
  CHECK(std::abs(alpha_hat - 0.2) / 0.2 < 0.01);
}

TEST_CASE("Bussgang residual is uncorrelated with the input") {
  RandomStream rng(21);
  for (auto [iip3, sigma2] : {std::pair{1.0, 0.3}, {3.0, 1.0}, {10.0, 0.1}, {2.0, 0.05}}) {
    const NonlinearityParams p{1.3, iip3};
    const Baseband x = gaussian_window(100'000, sigma2, rng);
    const Baseband y = apply_nonlinearity(x, p);
    const Eigen::VectorXcd d = y.samples - bussgang_gain(p, sigma2) * x.samples;
    const std::complex<double> c = (d.array() * x.samples.array().conjugate()).sum();
    const double corr = std::abs(c) / std::sqrt(d.squaredNorm() * x.samples.squaredNorm());
    CHECK(corr < 0.01);
    const double dist = d.squaredNorm() / d.size();
    CHECK(dist == doctest::Approx(bussgang_distortion_power(p, sigma2)).epsilon(0.05));
  }
}

TEST_CASE("phase noise preserves modulus and is identity at beta 0") {
  RandomStream rng(2);
  const Baseband x = gaussian_window(500, 1.0, rng);
  RandomStream pn(3);
  CHECK(apply_phase_noise(x, PhaseNoiseParams{0.0}, pn).samples == x.samples);
  const Baseband y = apply_phase_noise(x, PhaseNoiseParams{0.01}, pn);
  for (Eigen::Index n = 0; n < x.size(); ++n) CHECK(std::abs(y.samples[n]) == doctest::Approx(std::abs(x.samples[n])).epsilon(1e-14));
  CHECK(y.samples[0] == x.samples[0]);
  CHECK_THROWS_AS(apply_phase_noise(x, PhaseNoiseParams{-1.0}, pn), std::invalid_argument);
}

TEST_CASE("Wiener LO autocorrelation decays as exp(-pi beta |m| / fs)") {
  const double beta = 1e-3;
  const int len = 400;
  const int realizations = 10000;
  const Baseband ones{Eigen::VectorXcd::Ones(len), 1.0};
  const std::vector<int> lags{1, 10, 50, 100, 300};
  std::vector<Eigen::VectorXcd> samples(lags.size(), Eigen::VectorXcd(realizations));
  for (int r = 0; r < realizations; ++r) {
    auto rng = substream(77, r, StreamTag::PhaseNoise);
    const Baseband lo = apply_phase_noise(ones, PhaseNoiseParams{beta}, rng);
    for (std::size_t i = 0; i < lags.size(); ++i) samples[i][r] = lo.samples[50 + lags[i]] * std::conj(lo.samples[50]);
  }
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const Eigen::VectorXd re = samples[i].real();
    const auto st = oracle::mean_stat(re);
    const double expected = std::exp(-std::numbers::pi * beta * lags[i]);
    CHECK(std::abs(st.mean - expected) < 3 * st.stderr_ + 1e-12);
    const auto im = oracle::mean_stat(samples[i].imag());
    CHECK(std::abs(im.mean) < 3 * im.stderr_ + 1e-12);
  }
}

TEST_CASE("IQI coefficients and identity") {
  const IqiParams p{1.1, 0.05};
  const auto sum = p.k1() + std::conj(p.k2());
  CHECK(sum.real() == doctest::Approx(1.0));
  CHECK(sum.imag() == doctest::Approx(0.0));
  CHECK(irr_from_mismatch(p) > 1.0);

  RandomStream rng(5);
  const Baseband x = gaussian_window(128, 1.0, rng);
  CHECK(apply_iqi(x, IqiParams{}).samples == x.samples);
  CHECK_THROWS_AS(apply_iqi(x, IqiParams{0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_iqi(x, IqiParams{-1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("IQI is real-linear") {
  RandomStream rng(6);
  const Baseband x = gaussian_window(256, 1.0, rng);
  const IqiParams p{0.9, 0.1};
  for (double c : {-2.0, 0.5, 3.25}) {
    Baseband scaled = x;
    scaled.samples *= c;
    const Eigen::VectorXcd lhs = apply_iqi(scaled, p).samples;
    const Eigen::VectorXcd rhs = c * apply_iqi(x, p).samples;
    CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
  }
}

TEST_CASE("IQI image of a tone sits at 1/IRR") {
  const int n = 198;
  const int bin = 40;
  for (double irr_db : {15.0, 20.0, 25.0, 30.0}) {
    const IqiParams p = mismatch_from_irr(irr_db);
    const Eigen::VectorXcd spec = oracle::naive_dft(apply_iqi(tone(n, bin), p).samples);
    const double ratio_db = db(std::norm(spec[n - bin]) / std::norm(spec[bin]));
    CHECK(std::abs(ratio_db + irr_db) < 0.1);
  }
  // Phase-only mismatch against the closed form.
  const IqiParams ph{1.0, 0.2};
  const Eigen::VectorXcd spec = oracle::naive_dft(apply_iqi(tone(n, bin), ph).samples);
  CHECK(std::norm(spec[bin]) / std::norm(spec[n - bin]) == doctest::Approx(irr_from_mismatch(ph)).epsilon(1e-9));
}

TEST_CASE("IQI on one occupied channel only leaks into its mirror") {
  const auto plan = ChannelPlan::with_bins(6, 32);
  ScenarioConfig cfg{plan, OccupancyMap(plan, {2}), 0.0, 1.0};
  RandomStream rng(9);
  const Baseband y = apply_iqi(generate_signal(cfg, rng), mismatch_from_irr(20.0));
  const auto e = channelize(y, plan);
  for (int k : plan.channels()) {
    if (k == 2 || k == -2)
      CHECK(e.at(k) > 0.0);
    else
      CHECK(e.at(k) < 1e-25);
  }
}

TEST_CASE("IRR formula") {
  CHECK(std::isinf(irr_from_mismatch(IqiParams{1.0, 0.0})));
  const double c = std::cos(0.2);
  CHECK(irr_from_mismatch(IqiParams{1.0, 0.2}) == doctest::Approx((2 + 2 * c) / (2 - 2 * c)).epsilon(1e-12));
  for (double phi : {0.01, 0.1, 0.3, 1.0})
    CHECK(irr_from_mismatch(IqiParams{1.0, phi}) == doctest::Approx(irr_from_mismatch(IqiParams{1.0, -phi})).epsilon(1e-15));
}

TEST_CASE("mismatch_from_irr round trip") {
  const auto ideal = mismatch_from_irr(std::numeric_limits<double>::infinity());
  CHECK(ideal.g == 1.0);
  CHECK(ideal.phi == 0.0);
  for (double irr_db : {0.5, 10.0, 20.0, 25.0, 30.0, 45.0}) {
    const IqiParams p = mismatch_from_irr(irr_db);
    CHECK(p.phi == 0.0);
    const double target = std::pow(10.0, irr_db / 10.0);
    CHECK(std::abs(irr_from_mismatch(p) - target) / target < 1e-9);
    // Independent root of (1+g)^2 / (1-g)^2 = IRR on g in (0, 1) by bisection.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (std::pow((1 + mid) / (1 - mid), 2) < target ? lo : hi) = mid;
    }
    CHECK(p.g == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
  }
  CHECK(mismatch_from_irr(20.0).g == doctest::Approx((10.0 - 1) / (10.0 + 1)));
  CHECK_THROWS_AS(mismatch_from_irr(NAN), std::invalid_argument);
  CHECK_THROWS_AS(mismatch_from_irr(0.0), std::invalid_argument);
  CHECK_THROWS_AS(mismatch_from_irr(-3.0), std::invalid_argument);
}

TEST_CASE("front-end chain order and identity") {
  RandomStream rng(12);
  const Baseband x = gaussian_window(198, 1.0, rng);
  RandomStream pn(1);
  CHECK(front_end_chain(x, ImpairmentConfig{}, pn).samples == x.samples);
  const Baseband g = front_end_chain(x, ImpairmentConfig::ideal(3.0), pn);
  CHECK((g.samples - 3.0 * x.samples).norm() == 0.0);

  ImpairmentConfig cfg;
  cfg.nonlinearity = {1.2, 4.0};
  cfg.phase_noise = {2e-3};
  cfg.iqi = {0.95, 0.03};
  RandomStream a(44), b(44);
  const Baseband chained = front_end_chain(x, cfg, a);
  const Baseband manual = apply_iqi(apply_phase_noise(apply_nonlinearity(x, cfg.nonlinearity), cfg.phase_noise, b), cfg.iqi);
  CHECK(chained.samples == manual.samples);
  CHECK(kChainOrder[0] == ChainStage::Nonlinearity);
  CHECK(kChainOrder[2] == ChainStage::Iqi);
}

TEST_CASE("leakage patterns of single impairments") {
  // Noise-free occupied channel +2; compare channel energies to zero.
  const auto plan = ChannelPlan::with_bins(6, 32);
  ScenarioConfig cfg{plan, OccupancyMap(plan, {2}), 10.0, 1.0};
  ImpairmentConfig pn;
  pn.phase_noise.beta = 1e-3;
  Eigen::VectorXd leak = Eigen::VectorXd::Zero(6);
  for (int t = 0; t < 500; ++t) {
    auto s = substream(3, t, StreamTag::Signal);
    auto p = substream(3, t, StreamTag::PhaseNoise);
    leak += channelize(front_end_chain(generate_signal(cfg, s), pn, p), plan).values;
  }
  leak /= 500.0;
  // Adjacent channels dominate the leaked power.
  CHECK(leak[static_cast<Eigen::Index>(plan.position(1))] > 5 * leak[static_cast<Eigen::Index>(plan.position(-1))]);
  CHECK(leak[static_cast<Eigen::Index>(plan.position(3))] > 10 * leak[static_cast<Eigen::Index>(plan.position(-2))]);
}
