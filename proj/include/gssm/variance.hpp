#pragma once

// Analytic recursion for Var(1/Theta_t) under the linear evolutionary map and
// diagnostics for the stationary / increasing / decreasing regimes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "gssm/rng.hpp"
#include "gssm/ssm.hpp"

namespace gssm {

/// One step of the variance recursion. Returns std::nullopt (the divergence
/// marker) when (p + q) a <= 1, i.e. when the next predictive shape leaves
/// the finite-variance region.
std::optional<double> variance_step(double variance, double a_post, double p, double q);

/// Var(1/Theta) for Theta ~ Gamma(1 + a, b): b^2 / (a^2 (a - 1)); requires a > 1.
double inverse_gamma_variance(double a, double b);

struct VarianceRecord {
    int t = 0;
    std::optional<double> variance;  ///< Var(1/Theta_t); nullopt once diverged
    double a_pred = 0.0;
    double a_post = 0.0;
    double p = 0.0;  ///< coefficients carrying t to t + 1
    double q = 0.0;
};

struct VariancePath {
    std::vector<VarianceRecord> records;

    bool diverged() const;
    /// First t whose variance exceeds `level` (or diverged), if any.
    std::optional<int> first_exceeding(double level) const;
    /// First t whose variance falls below `level`, if any.
    std::optional<int> first_below(double level) const;
};

/// Deterministic path for t = 1..horizon; exposures[k] is v_{k+1}. The
/// a-sequence does not depend on responses, so no data is needed.
VariancePath variance_path(const ModelParams& params, std::span<const std::int64_t> exposures,
                           int horizon);

enum class VarianceBehavior { Stationary, Increasing, Decreasing, Diverging, Mixed };

const char* to_string(VarianceBehavior b);

/// Sign pattern of successive differences (tolerance 1e-9, relative to the
/// larger magnitude, floored at 1). Diverging if the marker appears or the
/// variance exceeds 1e12. Requires at least three records.
VarianceBehavior classify_regime_behavior(const VariancePath& path);

/// Emits "t,var,a_t,p_t,q_t" rows; diverged variances are written as "diverged".
void write_variance_path(std::ostream& out, const VariancePath& path);

struct ScalingReport {
    std::size_t states_checked = 0;
    double max_relative_error = 0.0;
    bool passed = false;
};

/// Simulates `n_paths` Smith-Miller trajectories over `exogenous` and checks,
/// for every filtered state with a_t > 1, that passing to the predictive
/// distribution scales Var(1/Theta | Y_{1:t}) by exactly 1/gamma.
ScalingReport smith_miller_conditional_scaling_check(const ModelParams& params,
                                                     std::span<const Exposure> exogenous,
                                                     int n_paths, Rng& rng,
                                                     double tolerance = 1e-10);

}  // namespace gssm
