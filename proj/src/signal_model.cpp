#include "edsim/signal_model.hpp"

#include <cmath>
#include <random>
#include <string>

namespace edsim {

OccupancyMap::OccupancyMap(const ChannelPlan& plan, const std::vector<int>& occupied) {
  for (int k : plan.channels()) hyp_[k] = Hypothesis::Idle;
  for (int k : occupied) {
    if (!plan.has_channel(k))
      throw std::invalid_argument("occupied channel " + std::to_string(k) + " not in plan");
    hyp_[k] = Hypothesis::Occupied;
  }
}

Hypothesis OccupancyMap::at(int k) const {
  auto it = hyp_.find(k);
  if (it == hyp_.end()) throw std::invalid_argument("no hypothesis for channel " + std::to_string(k));
  return it->second;
}

void OccupancyMap::set(int k, Hypothesis h) {
  auto it = hyp_.find(k);
  if (it == hyp_.end()) throw std::invalid_argument("no hypothesis for channel " + std::to_string(k));
  it->second = h;
}

std::vector<int> OccupancyMap::occupied_channels() const {
  std::vector<int> out;
  for (const auto& [k, h] : hyp_)
    if (h == Hypothesis::Occupied) out.push_back(k);
  return out;
}

bool OccupancyMap::conforms_to(const ChannelPlan& plan) const {
  if (hyp_.size() != plan.channels().size()) return false;
  for (int k : plan.channels())
    if (!hyp_.contains(k)) return false;
  return true;
}

ScenarioConfig ScenarioConfig::with(int k, Hypothesis h) const {
  ScenarioConfig out = *this;
  out.occupancy.set(k, h);
  return out;
}

double ScenarioConfig::expected_input_power() const {
  const double per_bin_signal = noise_psd * std::pow(10.0, snr_db / 10.0);
  const double occupied_bins =
      static_cast<double>(occupancy.occupied_channels().size()) * plan.bins_per_channel();
  return noise_psd + per_bin_signal * occupied_bins / plan.dft_size();
}

void validate(const ScenarioConfig& cfg) {
  if (!cfg.occupancy.conforms_to(cfg.plan))
    throw std::invalid_argument("occupancy map does not match channel plan");
  if (!std::isfinite(cfg.snr_db)) throw std::invalid_argument("snr_db must be finite");
  if (!(cfg.noise_psd >= 0.0) || !std::isfinite(cfg.noise_psd))
    throw std::invalid_argument("noise_psd must be finite and >= 0");
  if (cfg.noise_psd == 0.0 && !cfg.occupancy.occupied_channels().empty())
    throw std::invalid_argument("noise_psd must be positive when a channel is occupied");
}

ComplexVector<double> circular_gaussian(Eigen::Index n, double variance, RandomStream& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  ComplexVector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    out[i] = {re, im};
  }
  return out;
}

Baseband generate_signal(const ScenarioConfig& cfg, RandomStream& rng) {
  validate(cfg);
  const ChannelPlan& plan = cfg.plan;
  ComplexVector<double> spectrum = ComplexVector<double>::Zero(plan.dft_size());
  const auto occupied = cfg.occupancy.occupied_channels();
  if (occupied.empty()) return {spectrum, plan.sample_rate()};

  const double variance = cfg.noise_psd * std::pow(10.0, cfg.snr_db / 10.0);
  for (int k : occupied) {
    const auto bins = plan.bins(k);
    const auto values = circular_gaussian(static_cast<Eigen::Index>(bins.size()), variance, rng);
    for (std::size_t i = 0; i < bins.size(); ++i) spectrum[bins[i]] = values[static_cast<Eigen::Index>(i)];
  }
  return {unitary_idft(spectrum), plan.sample_rate()};
}

Baseband add_awgn(const Baseband& sig, double noise_psd, RandomStream& rng) {
  if (!(noise_psd >= 0.0) || !std::isfinite(noise_psd))
    throw std::invalid_argument("noise_psd must be finite and >= 0");
  if (noise_psd == 0.0) return sig;
  Baseband out = sig;
  out.samples += circular_gaussian(sig.size(), noise_psd, rng);
  return out;
}

}  // namespace edsim
