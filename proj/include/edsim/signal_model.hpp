#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "edsim/channel_plan.hpp"
#include "edsim/dft.hpp"
#include "edsim/random.hpp"

namespace edsim {

/// Complex baseband samples at a given sample rate.
template <typename Scalar>
struct BasicBaseband {
  ComplexVector<Scalar> samples;
  Scalar sample_rate{1};

  Eigen::Index size() const { return samples.size(); }
  bool all_finite() const { return samples.allFinite(); }
};

using Baseband = BasicBaseband<double>;

template <typename Scalar>
void require_valid(const BasicBaseband<Scalar>& sig) {
  if (sig.size() < 1) throw std::invalid_argument("baseband must hold at least one sample");
  if (!sig.all_finite()) throw std::invalid_argument("baseband samples must be finite");
}

enum class Hypothesis { Idle, Occupied };

/// Per-channel H0/H1 hypothesis, keyed by channel index.
class OccupancyMap {
 public:
  OccupancyMap() = default;
  /// All channels of `plan` idle except those listed in `occupied`.
  OccupancyMap(const ChannelPlan& plan, const std::vector<int>& occupied);

  Hypothesis at(int k) const;
  bool occupied(int k) const { return at(k) == Hypothesis::Occupied; }
  void set(int k, Hypothesis h);
  std::vector<int> occupied_channels() const;
  bool conforms_to(const ChannelPlan& plan) const;

  bool operator==(const OccupancyMap&) const = default;

 private:
  std::map<int, Hypothesis> hyp_;
};

struct ScenarioConfig {
  ChannelPlan plan;
  OccupancyMap occupancy;
  double snr_db = 0.0;
  /// Noise power per DFT bin; the mean per-channel energy statistic of pure
  /// noise equals this value.
  double noise_psd = 1.0;

  /// Copy with channel k forced to hypothesis h.
  ScenarioConfig with(int k, Hypothesis h) const;
  /// Per-sample power of signal plus noise at the antenna.
  double expected_input_power() const;
};

void validate(const ScenarioConfig& cfg);

/// One sensing window of dft_size samples: circular Gaussian bins of
/// variance noise_psd * 10^(snr_db/10) on every occupied channel, zero
/// elsewhere, unitary inverse DFT. No noise.
Baseband generate_signal(const ScenarioConfig& cfg, RandomStream& rng);

/// Adds white circular Gaussian noise of per-sample variance noise_psd.
Baseband add_awgn(const Baseband& sig, double noise_psd, RandomStream& rng);

/// i.i.d. circular complex Gaussian vector of total variance `variance`.
ComplexVector<double> circular_gaussian(Eigen::Index n, double variance, RandomStream& rng);

}  // namespace edsim
