#pragma once

#include <vector>

#include <Eigen/Core>

#include "edsim/channel_plan.hpp"
#include "edsim/signal_model.hpp"

namespace edsim {

/// Per-channel values in ChannelPlan::channels() order.
struct ChannelVector {
  std::vector<int> channels;
  Eigen::VectorXd values;

  double at(int k) const;
  double& at(int k);
};

/// T_k = (1/B) sum over bins(k) of |X[m]|^2, X the unitary DFT of the window.
struct EnergyVector : ChannelVector {};
struct ThresholdVector : ChannelVector {
  static ThresholdVector uniform(const ChannelPlan& plan, double lambda);
};

enum class Decision { Idle, Busy };

struct DecisionVector {
  std::vector<int> channels;
  std::vector<Decision> decisions;

  Decision at(int k) const;
};

/// Per-bin powers |X[m]|^2 of the unitary DFT.
Eigen::VectorXd periodogram(const Baseband& sig);

EnergyVector channelize(const Baseband& sig, const ChannelPlan& plan);
/// Same statistic from precomputed bin powers.
EnergyVector channel_energies(const Eigen::VectorXd& bin_power, const ChannelPlan& plan);

/// Busy iff T_k > lambda_k (ties decide idle).
DecisionVector decide(const EnergyVector& e, const ThresholdVector& t);

/// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Pfa of the ideal detector: T ~ Gamma(B, noise_power / B) under H0.
double ideal_pfa(double lambda, double noise_power, int bins);
/// Pd of the ideal detector with Gaussian signal bins of power signal_power.
double ideal_pd(double lambda, double noise_power, double signal_power, int bins);

}  // namespace edsim
