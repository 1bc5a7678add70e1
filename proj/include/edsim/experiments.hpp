#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "edsim/detector.hpp"
#include "edsim/rf_frontend.hpp"
#include "edsim/signal_model.hpp"

namespace edsim {

/// Requested quantile cannot be resolved with the trials available.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default worker count: $EDSIM_WORKERS if set, else hardware concurrency.
unsigned default_workers();

struct TrialBatch {
  ScenarioConfig scenario;
  ImpairmentConfig impairments;
  std::uint64_t seed = 0;
  /// n_trials x K, columns in plan.channels() order.
  Eigen::MatrixXd energies;
  /// Samples that entered the LNA above IIP3/2, summed over all trials.
  std::int64_t overdriven_samples = 0;

  std::size_t n_trials() const { return static_cast<std::size_t>(energies.rows()); }
  const ChannelPlan& plan() const { return scenario.plan; }
  const OccupancyMap& occupancy() const { return scenario.occupancy; }
  Eigen::VectorXd channel(int k) const { return energies.col(static_cast<Eigen::Index>(plan().position(k))); }
  EnergyVector trial(std::size_t t) const;
};

/// The received window of trial t: signal, antenna noise, front end.
Baseband simulate_window(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                         std::uint64_t seed, std::uint64_t trial);

/// Trial t draws from substream(seed, t, .) only, so the batch is
/// independent of `workers`.
TrialBatch run_trials(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                      std::size_t n_trials, std::uint64_t seed, unsigned workers = default_workers());

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for `successes` out of `n` at 95 %.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct RocPoint {
  double lambda = 0.0;
  /// Target Pfa the threshold was derived from; NaN for explicit grids.
  double target_pfa = std::numeric_limits<double>::quiet_NaN();
  double pfa = 0.0;
  double pd = 0.0;
  Interval pfa_ci;
  Interval pd_ci;
};

struct RocCurve {
  int channel = 0;
  /// Sorted by lambda descending.
  std::vector<RocPoint> points;
  std::size_t n_h0 = 0;
  std::size_t n_h1 = 0;
};

RocCurve estimate_roc(const TrialBatch& batch_h0, const TrialBatch& batch_h1,
                      const std::vector<double>& lambda_grid, int channel);

/// Linear-interpolated (type 7) sample quantile, p in [0, 1].
double empirical_quantile(Eigen::VectorXd values, double p);

/// Empirical (1 - target_pfa) quantile of the idle channel's statistic.
/// Needs n_trials >= 50 / target_pfa, else throws PrecisionError.
double calibrate_threshold(const TrialBatch& batch_h0, int channel, double target_pfa);

/// Fraction of trials with T_k > lambda.
double exceed_fraction(const TrialBatch& batch, int channel, double lambda, std::size_t* count = nullptr);

enum class SweepParameter { Beta, IrrDb };

std::string to_string(SweepParameter p);

struct SweepEntry {
  double value = 0.0;
  RocCurve curve;
  std::int64_t overdriven_samples = 0;
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::Beta;
  std::vector<double> values;
  std::vector<double> target_pfa_grid;
  int channel = 1;
  std::size_t n_trials = 10000;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();
};

/// Base impairments with the swept parameter replaced by `value`.
ImpairmentConfig with_parameter(const ImpairmentConfig& base, SweepParameter parameter, double value);

/// One ROC per swept value. For each value the H0/H1 batches are drawn from
/// the same seed, so every value sees identical signal and noise draws.
/// Thresholds per value are the H0 quantiles at target_pfa_grid.
std::vector<SweepEntry> sweep_impairment(const ScenarioConfig& base_scenario,
                                        const ImpairmentConfig& base_impairments,
                                        const SweepSpec& spec);

/// ROC point whose threshold was derived from `target_pfa`.
const RocPoint& point_at(const RocCurve& curve, double target_pfa);

enum class SpectrumStage { Input, AfterLna, PhaseNoiseOnly, IqiOnly, FullChain };

inline constexpr std::array<SpectrumStage, 5> kSpectrumStages{
    SpectrumStage::Input, SpectrumStage::AfterLna, SpectrumStage::PhaseNoiseOnly,
    SpectrumStage::IqiOnly, SpectrumStage::FullChain};

std::string stage_name(SpectrumStage s);

struct StageSpectra {
  ChannelPlan plan;
  /// Averaged per-bin power, natural DFT order, one per kSpectrumStages.
  std::array<Eigen::VectorXd, 5> power;

  const Eigen::VectorXd& at(SpectrumStage s) const { return power[static_cast<std::size_t>(s)]; }
};

/// Averaged periodograms at the five front-end stages. The phase-noise-only
/// and IQI-only stages keep the LNA's linear gain.
StageSpectra psd_stages(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                        std::size_t n_avg, std::uint64_t seed);

}  // namespace edsim
