#pragma once

// Direct-conversion receive chain: LNA nonlinearity, LO phase noise, I/Q
// imbalance. All transforms are memoryless per sample except the phase
// noise, which is a free-running Wiener process.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "edsim/random.hpp"
#include "edsim/signal_model.hpp"

namespace edsim {

/// Memoryless cubic LNA: y = a1 x + a3 |x|^2 x, a3 = -(4/3) a1 / IIP3^2.
template <typename Scalar>
struct BasicNonlinearityParams {
  Scalar a1{1};
  Scalar iip3{std::numeric_limits<Scalar>::infinity()};

  Scalar a3() const {
    if (std::isinf(iip3)) return Scalar(0);
    return -Scalar(4) / Scalar(3) * a1 / (iip3 * iip3);
  }
  bool linear() const { return std::isinf(iip3); }
  bool identity() const { return linear() && a1 == Scalar(1); }
  void validate() const {
    if (!(a1 > 0) || !std::isfinite(a1)) throw std::invalid_argument("a1 must be positive and finite");
    if (!(iip3 > 0)) throw std::invalid_argument("iip3 must be positive (or infinite)");
  }
};

/// Free-running LO with Lorentzian spectrum of 3 dB full width `beta` Hz.
template <typename Scalar>
struct BasicPhaseNoiseParams {
  Scalar beta{0};

  bool identity() const { return beta == Scalar(0); }
  void validate() const {
    if (!(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be finite and >= 0");
  }
};

/// Receive I/Q imbalance: amplitude ratio g and phase mismatch phi.
template <typename Scalar>
struct BasicIqiParams {
  Scalar g{1};
  Scalar phi{0};

  std::complex<Scalar> k1() const {
    return (Scalar(1) + g * std::polar(Scalar(1), -phi)) / Scalar(2);
  }
  std::complex<Scalar> k2() const {
    return (Scalar(1) - g * std::polar(Scalar(1), phi)) / Scalar(2);
  }
  bool identity() const { return g == Scalar(1) && phi == Scalar(0); }
  void validate() const {
    if (!(g > 0) || !std::isfinite(g)) throw std::invalid_argument("IQI amplitude ratio g must be positive");
    if (!std::isfinite(phi)) throw std::invalid_argument("IQI phase mismatch must be finite");
  }
};

enum class ChainStage { Nonlinearity, PhaseNoise, Iqi };

/// Order in which front_end_chain applies the impairments.
inline constexpr std::array<ChainStage, 3> kChainOrder{ChainStage::Nonlinearity,
                                                       ChainStage::PhaseNoise, ChainStage::Iqi};

template <typename Scalar>
struct BasicImpairmentConfig {
  BasicNonlinearityParams<Scalar> nonlinearity;
  BasicPhaseNoiseParams<Scalar> phase_noise;
  BasicIqiParams<Scalar> iqi;

  static BasicImpairmentConfig ideal(Scalar a1 = Scalar(1)) {
    BasicImpairmentConfig c;
    c.nonlinearity.a1 = a1;
    return c;
  }
  /// Only the impairments selected are kept; the rest revert to identity
  /// (the LNA keeps its linear gain).
  BasicImpairmentConfig only(bool keep_nl, bool keep_pn, bool keep_iqi) const {
    BasicImpairmentConfig c = ideal(nonlinearity.a1);
    if (keep_nl) c.nonlinearity = nonlinearity;
    if (keep_pn) c.phase_noise = phase_noise;
    if (keep_iqi) c.iqi = iqi;
    return c;
  }
  void validate() const {
    nonlinearity.validate();
    phase_noise.validate();
    iqi.validate();
  }
};

using NonlinearityParams = BasicNonlinearityParams<double>;
using PhaseNoiseParams = BasicPhaseNoiseParams<double>;
using IqiParams = BasicIqiParams<double>;
using ImpairmentConfig = BasicImpairmentConfig<double>;

template <typename Scalar>
BasicBaseband<Scalar> apply_nonlinearity(const BasicBaseband<Scalar>& sig,
                                         const BasicNonlinearityParams<Scalar>& p) {
  p.validate();
  if (p.identity()) return sig;
  BasicBaseband<Scalar> out = sig;
  const Scalar a1 = p.a1;
  const Scalar a3 = p.a3();
  out.samples = sig.samples.unaryExpr(
      [a1, a3](const std::complex<Scalar>& x) { return a1 * x + a3 * std::norm(x) * x; });
  return out;
}

/// Samples driven past |x| > IIP3/2, where the cubic model stops being
/// trustworthy.
template <typename Scalar>
Eigen::Index overdriven_samples(const BasicBaseband<Scalar>& sig,
                                const BasicNonlinearityParams<Scalar>& p) {
  if (p.linear()) return 0;
  const Scalar limit = p.iip3 / Scalar(2);
  return (sig.samples.array().abs() > limit).count();
}

/// Bussgang gain for circular Gaussian input of variance `input_power`:
/// alpha = E[y x*] / E[|x|^2] = a1 + 2 a3 input_power.
template <typename Scalar>
std::complex<Scalar> bussgang_gain(const BasicNonlinearityParams<Scalar>& p, Scalar input_power) {
  p.validate();
  if (!(input_power >= 0)) throw std::invalid_argument("input_power must be >= 0");
  return {p.a1 + Scalar(2) * p.a3() * input_power, Scalar(0)};
}

/// Power of the Bussgang residual d = y - alpha x for the same input:
/// E|d|^2 = 2 a3^2 P^3.
template <typename Scalar>
Scalar bussgang_distortion_power(const BasicNonlinearityParams<Scalar>& p, Scalar input_power) {
  const Scalar a3 = p.a3();
  return Scalar(2) * a3 * a3 * input_power * input_power * input_power;
}

/// y[n] = x[n] e^{j theta[n]}, theta[0] = 0, increments N(0, 2 pi beta / fs).
template <typename Scalar>
BasicBaseband<Scalar> apply_phase_noise(const BasicBaseband<Scalar>& sig,
                                        const BasicPhaseNoiseParams<Scalar>& p,
                                        RandomStream& rng) {
  p.validate();
  if (!(sig.sample_rate > 0)) throw std::invalid_argument("sample_rate must be positive");
  if (p.identity()) return sig;
  BasicBaseband<Scalar> out = sig;
  const Scalar step_sd =
      std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar> * p.beta / sig.sample_rate);
  std::normal_distribution<Scalar> increment(Scalar(0), step_sd);
  Scalar theta = 0;
  for (Eigen::Index n = 0; n < sig.size(); ++n) {
    out.samples[n] = sig.samples[n] * std::polar(Scalar(1), theta);
    theta += increment(rng);
  }
  return out;
}

/// y[n] = K1 x[n] + K2 conj(x[n]).
template <typename Scalar>
BasicBaseband<Scalar> apply_iqi(const BasicBaseband<Scalar>& sig, const BasicIqiParams<Scalar>& p) {
  p.validate();
  if (p.identity()) return sig;
  BasicBaseband<Scalar> out = sig;
  const std::complex<Scalar> k1 = p.k1();
  const std::complex<Scalar> k2 = p.k2();
  out.samples = k1 * sig.samples + k2 * sig.samples.conjugate();
  return out;
}

/// Image rejection ratio |K1|^2 / |K2|^2 (linear); +inf when K2 = 0.
template <typename Scalar>
Scalar irr_from_mismatch(const BasicIqiParams<Scalar>& p) {
  const Scalar num = Scalar(1) + Scalar(2) * p.g * std::cos(p.phi) + p.g * p.g;
  const Scalar den = Scalar(1) - Scalar(2) * p.g * std::cos(p.phi) + p.g * p.g;
  if (den <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  return num / den;
}

/// Amplitude-only mismatch (phi = 0, g <= 1) realising the given IRR in dB.
template <typename Scalar = double>
BasicIqiParams<Scalar> mismatch_from_irr(Scalar irr_db) {
  if (std::isnan(irr_db) || irr_db == -std::numeric_limits<Scalar>::infinity())
    throw std::invalid_argument("irr_db must be a number");
  if (std::isinf(irr_db)) return {Scalar(1), Scalar(0)};
  if (!(irr_db > 0)) throw std::invalid_argument("irr_db must be > 0 dB");
  // IRR = ((1 + g) / (1 - g))^2 for phi = 0.
  const Scalar root = std::pow(Scalar(10), irr_db / Scalar(20));
  return {(root - Scalar(1)) / (root + Scalar(1)), Scalar(0)};
}

template <typename Scalar>
BasicBaseband<Scalar> front_end_chain(const BasicBaseband<Scalar>& sig,
                                      const BasicImpairmentConfig<Scalar>& cfg,
                                      RandomStream& rng) {
  cfg.validate();
  BasicBaseband<Scalar> out = sig;
  for (ChainStage stage : kChainOrder) {
    switch (stage) {
      case ChainStage::Nonlinearity: out = apply_nonlinearity(out, cfg.nonlinearity); break;
      case ChainStage::PhaseNoise: out = apply_phase_noise(out, cfg.phase_noise, rng); break;
      case ChainStage::Iqi: out = apply_iqi(out, cfg.iqi); break;
    }
  }
  return out;
}

}  // namespace edsim
