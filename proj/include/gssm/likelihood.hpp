#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gssm/ssm.hpp"

namespace gssm {

/// log f(y_s | y_{1:s-1}) for y > 0, v >= 1: the Gamma observation density
/// integrated against the predictive Gamma(1 + a_pred, b_pred).
double conditional_log_density(double y, double a_pred, double b_pred, std::int64_t v,
                               double mu, double psi);

inline double conditional_log_density(double y, const FilterState& predictive, std::int64_t v,
                                      double mu, double psi) {
    return conditional_log_density(y, predictive.a_pred, predictive.b_pred, v, mu, psi);
}

/// Sum of conditional log-densities over periods with v > 0; empty periods
/// contribute exactly zero.
double trajectory_log_likelihood(const ModelParams& params, const Trajectory& traj);

struct LogLikelihood {
    double total = 0.0;
    std::vector<double> per_trajectory;
    std::int64_t n_effective_periods = 0;
};

LogLikelihood dataset_log_likelihood(const ModelParams& params,
                                     std::span<const Trajectory> dataset, unsigned threads = 1);

/// Total only, without per-trajectory bookkeeping; the optimizer hot path.
double total_log_likelihood(const ModelParams& params, std::span<const Trajectory> dataset);

std::int64_t count_effective_periods(std::span<const Trajectory> dataset);

struct TailReport {
    double tail_index = 0.0;       ///< -(a_pred + 2) for the density
    double limit_constant = 0.0;   ///< lim f(y) y^(a+2)
    double evaluated = 0.0;        ///< f(y) y^(a+2) at y = 1e6 * mu psi b
    double relative_error = 0.0;
    bool mean_finite = false;      ///< a_pred > 0
    bool variance_finite = false;  ///< a_pred > 1
    bool passed = false;           ///< relative_error < 1e-3
};

/// Checks the regular-variation constant of the one-step predictive density.
TailReport tail_index_check(double a_pred, double b_pred, std::int64_t v, double mu, double psi);

}  // namespace gssm
