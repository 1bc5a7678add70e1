#include "edsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/SpecialFunctions>

namespace edsim {

namespace {

std::size_t index_of(const std::vector<int>& channels, int k) {
  auto it = std::find(channels.begin(), channels.end(), k);
  if (it == channels.end()) throw std::invalid_argument("channel " + std::to_string(k) + " not present");
  return static_cast<std::size_t>(it - channels.begin());
}

}  // namespace

double ChannelVector::at(int k) const { return values[static_cast<Eigen::Index>(index_of(channels, k))]; }
double& ChannelVector::at(int k) { return values[static_cast<Eigen::Index>(index_of(channels, k))]; }

ThresholdVector ThresholdVector::uniform(const ChannelPlan& plan, double lambda) {
  ThresholdVector t;
  t.channels = plan.channels();
  t.values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(t.channels.size()), lambda);
  return t;
}

Decision DecisionVector::at(int k) const { return decisions[index_of(channels, k)]; }

Eigen::VectorXd periodogram(const Baseband& sig) {
  return unitary_dft(sig.samples).cwiseAbs2();
}

EnergyVector channel_energies(const Eigen::VectorXd& bin_power, const ChannelPlan& plan) {
  if (bin_power.size() != plan.dft_size())
    throw std::invalid_argument("window length " + std::to_string(bin_power.size()) +
                                " does not match dft_size " + std::to_string(plan.dft_size()));
  EnergyVector e;
  e.channels = plan.channels();
  e.values.resize(static_cast<Eigen::Index>(e.channels.size()));
  const double inv_b = 1.0 / plan.bins_per_channel();
  for (std::size_t i = 0; i < e.channels.size(); ++i) {
    double sum = 0.0;
    for (int m : plan.bins(e.channels[i])) sum += bin_power[m];
    e.values[static_cast<Eigen::Index>(i)] = sum * inv_b;
  }
  return e;
}

EnergyVector channelize(const Baseband& sig, const ChannelPlan& plan) {
  if (sig.size() != plan.dft_size())
    throw std::invalid_argument("window length " + std::to_string(sig.size()) +
                                " does not match dft_size " + std::to_string(plan.dft_size()));
  return channel_energies(periodogram(sig), plan);
}

DecisionVector decide(const EnergyVector& e, const ThresholdVector& t) {
  if (e.channels != t.channels) throw std::invalid_argument("energy and threshold channel sets differ");
  DecisionVector d;
  d.channels = e.channels;
  d.decisions.reserve(e.channels.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    d.decisions.push_back(e.values[i] > t.values[i] ? Decision::Busy : Decision::Idle);
  return d;
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_q shape must be positive");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return Eigen::numext::igammac(a, x);
}

double ideal_pfa(double lambda, double noise_power, int bins) {
  return ideal_pd(lambda, noise_power, 0.0, bins);
}

double ideal_pd(double lambda, double noise_power, double signal_power, int bins) {
  if (!(noise_power > 0.0) || !std::isfinite(noise_power))
    throw std::invalid_argument("noise_power must be positive and finite");
  if (!(signal_power >= 0.0) || !std::isfinite(signal_power))
    throw std::invalid_argument("signal_power must be finite and >= 0");
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (std::isnan(lambda)) throw std::invalid_argument("lambda must be a number");
  const double scale = (noise_power + signal_power) / bins;
  return gamma_q(static_cast<double>(bins), lambda / scale);
}

}  // namespace edsim
