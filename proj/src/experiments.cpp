#include "edsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace edsim {

unsigned default_workers() {
  if (const char* env = std::getenv("EDSIM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EnergyVector TrialBatch::trial(std::size_t t) const {
  EnergyVector e;
  e.channels = plan().channels();
  e.values = energies.row(static_cast<Eigen::Index>(t)).transpose();
  return e;
}

Baseband simulate_window(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                         std::uint64_t seed, std::uint64_t trial) {
  auto signal_rng = substream(seed, trial, StreamTag::Signal);
  auto noise_rng = substream(seed, trial, StreamTag::Noise);
  auto pn_rng = substream(seed, trial, StreamTag::PhaseNoise);
  Baseband x = add_awgn(generate_signal(scenario, signal_rng), scenario.noise_psd, noise_rng);
  return front_end_chain(x, impairments, pn_rng);
}

namespace {

// Runs fn(t) for t in [0, n) on `workers` threads with a static stride.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t t = 0; t < n; ++t) fn(t, 0u);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < n; t += workers) fn(t, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

TrialBatch run_trials(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                      std::size_t n_trials, std::uint64_t seed, unsigned workers) {
  if (n_trials == 0) throw std::invalid_argument("n_trials must be >= 1");
  validate(scenario);
  impairments.validate();

  TrialBatch batch{scenario, impairments, seed, {}, 0};
  const ChannelPlan& plan = scenario.plan;
  const auto k = static_cast<Eigen::Index>(plan.channels().size());
  batch.energies.resize(static_cast<Eigen::Index>(n_trials), k);

  std::vector<std::int64_t> overdriven(std::max(1u, workers), 0);
  parallel_for(n_trials, workers, [&](std::size_t t, unsigned w) {
    auto signal_rng = substream(seed, t, StreamTag::Signal);
    auto noise_rng = substream(seed, t, StreamTag::Noise);
    auto pn_rng = substream(seed, t, StreamTag::PhaseNoise);
    Baseband x = add_awgn(generate_signal(scenario, signal_rng), scenario.noise_psd, noise_rng);
    overdriven[w] += overdriven_samples(x, impairments.nonlinearity);
    const EnergyVector e = channelize(front_end_chain(x, impairments, pn_rng), plan);
    batch.energies.row(static_cast<Eigen::Index>(t)) = e.values.transpose();
  });
  for (auto v : overdriven) batch.overdriven_samples += v;
  return batch;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) throw std::invalid_argument("wilson_interval needs n >= 1");
  if (successes > n) throw std::invalid_argument("successes exceed trials");
  const double nn = static_cast<double>(n);
  const double p = successes / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // exact endpoints at the extremes; rounding would otherwise exclude p
  return {successes == 0 ? 0.0 : std::max(0.0, center - half), successes == n ? 1.0 : std::min(1.0, center + half)};
}

double exceed_fraction(const TrialBatch& batch, int channel, double lambda, std::size_t* count) {
  const auto col = batch.energies.col(static_cast<Eigen::Index>(batch.plan().position(channel)));
  const auto c = static_cast<std::size_t>((col.array() > lambda).count());
  if (count) *count = c;
  return static_cast<double>(c) / static_cast<double>(batch.n_trials());
}

RocCurve estimate_roc(const TrialBatch& batch_h0, const TrialBatch& batch_h1,
                      const std::vector<double>& lambda_grid, int channel) {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
  if (!(batch_h0.plan() == batch_h1.plan())) throw std::invalid_argument("batches use different plans");
  if (batch_h0.occupancy().occupied(channel))
    throw std::invalid_argument("channel under test must be idle in the H0 batch");
  if (!batch_h1.occupancy().occupied(channel))
    throw std::invalid_argument("channel under test must be occupied in the H1 batch");

  RocCurve curve;
  curve.channel = channel;
  curve.n_h0 = batch_h0.n_trials();
  curve.n_h1 = batch_h1.n_trials();
  for (double lambda : lambda_grid) {
    if (std::isnan(lambda)) throw std::invalid_argument("lambda grid contains NaN");
    RocPoint pt;
    pt.lambda = lambda;
    std::size_t fa = 0, det = 0;
    pt.pfa = exceed_fraction(batch_h0, channel, lambda, &fa);
    pt.pd = exceed_fraction(batch_h1, channel, lambda, &det);
    pt.pfa_ci = wilson_interval(fa, curve.n_h0);
    pt.pd_ci = wilson_interval(det, curve.n_h1);
    curve.points.push_back(pt);
  }
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const RocPoint& a, const RocPoint& b) { return a.lambda > b.lambda; });
  return curve;
}

double empirical_quantile(Eigen::VectorXd values, double p) {
  if (values.size() == 0) throw std::invalid_argument("quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double calibrate_threshold(const TrialBatch& batch_h0, int channel, double target_pfa) {
  if (!(target_pfa > 0.0 && target_pfa < 1.0))
    throw std::invalid_argument("target_pfa must lie in (0, 1)");
  if (batch_h0.occupancy().occupied(channel))
    throw std::invalid_argument("channel " + std::to_string(channel) + " must be idle for calibration");
  const double needed = 50.0 / target_pfa;
  if (static_cast<double>(batch_h0.n_trials()) < needed)
    throw PrecisionError("calibrating Pfa " + std::to_string(target_pfa) + " needs at least " +
                         std::to_string(static_cast<long long>(std::ceil(needed))) + " trials, have " +
                         std::to_string(batch_h0.n_trials()));
  return empirical_quantile(batch_h0.channel(channel), 1.0 - target_pfa);
}

std::string to_string(SweepParameter p) {
  return p == SweepParameter::Beta ? "beta" : "irr_db";
}

ImpairmentConfig with_parameter(const ImpairmentConfig& base, SweepParameter parameter, double value) {
  ImpairmentConfig out = base;
  if (parameter == SweepParameter::Beta)
    out.phase_noise.beta = value;
  else
    out.iqi = mismatch_from_irr(value);
  return out;
}

std::vector<SweepEntry> sweep_impairment(const ScenarioConfig& base_scenario,
                                        const ImpairmentConfig& base_impairments,
                                        const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep value list is empty");
  if (spec.target_pfa_grid.empty()) throw std::invalid_argument("target_pfa grid is empty");
  const ChannelPlan& plan = base_scenario.plan;
  const int k = spec.channel;
  if (!plan.has_channel(k)) throw std::invalid_argument("channel under test not in plan");

  if (spec.parameter == SweepParameter::Beta) {
    if (!std::is_sorted(spec.values.begin(), spec.values.end()))
      throw std::invalid_argument("beta values must be sorted ascending");
    bool any = false;
    for (int n : plan.adjacent(k)) any = any || base_scenario.occupancy.occupied(n);
    if (!any) throw std::invalid_argument("beta sweep needs an occupied neighbour of the channel under test");
  } else {
    if (!std::is_sorted(spec.values.begin(), spec.values.end(), std::greater<>()))
      throw std::invalid_argument("irr_db values must be sorted descending (weakest impairment first)");
    if (!base_scenario.occupancy.occupied(ChannelPlan::mirror(k)))
      throw std::invalid_argument("IRR sweep needs the mirror channel occupied");
  }

  const ScenarioConfig h0 = base_scenario.with(k, Hypothesis::Idle);
  const ScenarioConfig h1 = base_scenario.with(k, Hypothesis::Occupied);
  std::vector<SweepEntry> out;
  for (double value : spec.values) {
    const ImpairmentConfig imp = with_parameter(base_impairments, spec.parameter, value);
    const TrialBatch b0 = run_trials(h0, imp, spec.n_trials, spec.seed, spec.workers);
    const TrialBatch b1 = run_trials(h1, imp, spec.n_trials, spec.seed, spec.workers);
    const Eigen::VectorXd idle = b0.channel(k);
    std::vector<double> lambdas;
    for (double pfa : spec.target_pfa_grid) {
      if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("target Pfa must lie in (0, 1)");
      lambdas.push_back(empirical_quantile(idle, 1.0 - pfa));
    }
    RocCurve curve = estimate_roc(b0, b1, lambdas, k);
    for (auto& pt : curve.points) {
      for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (lambdas[i] == pt.lambda && std::isnan(pt.target_pfa)) pt.target_pfa = spec.target_pfa_grid[i];
    }
    out.push_back({value, std::move(curve), b0.overdriven_samples + b1.overdriven_samples});
  }
  return out;
}

const RocPoint& point_at(const RocCurve& curve, double target_pfa) {
  for (const auto& pt : curve.points)
    if (pt.target_pfa == target_pfa) return pt;
  throw std::invalid_argument("no ROC point for target Pfa " + std::to_string(target_pfa));
}

std::string stage_name(SpectrumStage s) {
  switch (s) {
    case SpectrumStage::Input: return "a_input";
    case SpectrumStage::AfterLna: return "b_after_lna";
    case SpectrumStage::PhaseNoiseOnly: return "c_phase_noise_only";
    case SpectrumStage::IqiOnly: return "d_iqi_only";
    case SpectrumStage::FullChain: return "e_joint";
  }
  return "unknown";
}

StageSpectra psd_stages(const ScenarioConfig& scenario, const ImpairmentConfig& impairments,
                        std::size_t n_avg, std::uint64_t seed) {
  if (n_avg == 0) throw std::invalid_argument("n_avg must be >= 1");
  validate(scenario);
  impairments.validate();
  const ChannelPlan& plan = scenario.plan;
  StageSpectra out{plan, {}};
  for (auto& p : out.power) p = Eigen::VectorXd::Zero(plan.dft_size());

  const ImpairmentConfig pn_only = impairments.only(false, true, false);
  const ImpairmentConfig iqi_only = impairments.only(false, false, true);
  for (std::size_t t = 0; t < n_avg; ++t) {
    auto signal_rng = substream(seed, t, StreamTag::Signal);
    auto noise_rng = substream(seed, t, StreamTag::Noise);
    const Baseband x = add_awgn(generate_signal(scenario, signal_rng), scenario.noise_psd, noise_rng);
    auto pn_rng_c = substream(seed, t, StreamTag::PhaseNoise);
    auto pn_rng_e = substream(seed, t, StreamTag::PhaseNoise);
    auto none = substream(seed, t, StreamTag::PhaseNoise);
    out.power[0] += periodogram(x);
    out.power[1] += periodogram(apply_nonlinearity(x, impairments.nonlinearity));
    out.power[2] += periodogram(front_end_chain(x, pn_only, pn_rng_c));
    out.power[3] += periodogram(front_end_chain(x, iqi_only, none));
    out.power[4] += periodogram(front_end_chain(x, impairments, pn_rng_e));
  }
  for (auto& p : out.power) p /= static_cast<double>(n_avg);
  return out;
}

}  // namespace edsim
