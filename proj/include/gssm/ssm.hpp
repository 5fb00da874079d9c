#pragma once

// Observation-driven Gamma-Gamma state-space engine.
//
// The latent factor follows Theta_t | Y_{1:t-1} ~ Gamma(1 + a_{t|t-1}, b_{t|t-1})
// (rate convention), responses Y_t | Theta_t ~ Gamma(v_t/psi, Theta_t/(mu_t psi))
// for v_t > 0 and Y_t = 0 otherwise. Filtering is exact conjugate updating;
// the transition from filtering to predictive distribution is the linear
// evolutionary map
//   a_{t+1|t} = (p_t + q_t) a_t,   b_{t+1|t} = p_t a_t + q_t b_t,
// whose coefficients are supplied by a Regime.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gssm/rng.hpp"

namespace gssm {

/// Classic Smith-Miller: p_t = 0, q_t = (gamma (a_t - 1) + 1) / a_t.
struct SmithMiller {
    double gamma;
};

/// Variance-stationary regime with constant credibility weight Delta.
/// q_t keeps Var(1/Theta_t) constant; p_t = kappa q_t with
/// kappa = (1 - Delta) / Delta.
struct Stationary {
    double delta;
    double kappa() const { return (1.0 - delta) / delta; }
};

/// Constant p in [0, 1) with q = 1 - p; variance is non-increasing.
struct Decreasing {
    double p;
};

/// No evolution (p = 0, q = 1): a static random effect.
struct Static {};

/// Explicit per-period schedules; element k applies to period t = k + 1.
struct Custom {
    std::vector<double> p;
    std::vector<double> q;
};

using Regime = std::variant<SmithMiller, Stationary, Decreasing, Static, Custom>;

std::string regime_name(const Regime& regime);

struct ModelParams {
    double a_init;      ///< a_{1|0}; b_{1|0} is always equal to it
    double dispersion;  ///< psi
    Regime regime;
};

void validate(const ModelParams& params);

struct Coefficients {
    double p;
    double q;
    double delta() const { return q / (p + q); }
};

/// Sufficient statistics for one period: predictive pair (a_{t|t-1}, b_{t|t-1})
/// and, once the period's observation is absorbed, the filtering pair (a_t, b_t).
struct FilterState {
    int t = 1;
    double a_pred = 0.0;
    double b_pred = 0.0;
    double a_post = 0.0;
    double b_post = 0.0;
    bool filtered = false;

    /// E[1/Theta_t | Y_{1:t-1}]
    double predictive_inverse_mean() const { return b_pred / a_pred; }
    /// E[1/Theta_t | Y_{1:t}]
    double posterior_inverse_mean() const { return b_post / a_post; }
};

/// Six-component affine map: a' = xi1 + xi2 a + xi3 b, b' = xi4 + xi5 a + xi6 b.
struct AffineCoefficients {
    double xi1 = 0.0, xi2 = 1.0, xi3 = 0.0;
    double xi4 = 0.0, xi5 = 0.0, xi6 = 1.0;

    static AffineCoefficients from_linear(const Coefficients& c) {
        return {0.0, c.p + c.q, 0.0, 0.0, c.p, c.q};
    }
};

struct Period {
    std::int64_t v = 0;         ///< exposure (number of claims)
    std::optional<double> mu;   ///< mean severity; required when v > 0
    double y = 0.0;             ///< aggregate response
    std::string label;          ///< optional caller label, carried through
};

struct Trajectory {
    std::string id;
    std::vector<Period> periods;

    std::size_t size() const { return periods.size(); }
};

/// Throws InconsistentObservation / DomainError naming the offending period.
void validate(const Trajectory& traj);

struct Exposure {
    std::int64_t v;
    double mu;
};

FilterState init_state(const ModelParams& params);

/// Absorbs (v, mu, y) into the predictive pair. mu is ignored when v == 0.
FilterState filter_update(const FilterState& state, std::int64_t v, double mu, double y,
                          double psi);
FilterState filter_update(const FilterState& state, const Period& period, double psi);

Coefficients resolve_coefficients(const ModelParams& params, const FilterState& state);

/// Filtering -> next predictive under the linear evolutionary map.
FilterState state_update(const FilterState& state, const Coefficients& c);
FilterState affine_update(const FilterState& state, const AffineCoefficients& xi);

/// resolve_coefficients followed by state_update.
FilterState advance(const ModelParams& params, const FilterState& state);

/// Filtered states for t = 1..T; pure and deterministic.
std::vector<FilterState> run_filter(const ModelParams& params, const Trajectory& traj);

/// Predictive state for period T+1 after filtering the whole trajectory
/// (init_state for an empty trajectory).
FilterState next_predictive(const ModelParams& params, const Trajectory& traj);

struct SimulatedTrajectory {
    Trajectory trajectory;
    std::vector<double> theta;  ///< latent draws Theta_1..Theta_T
};

/// Draws a response path. Theta_t is sampled from the predictive Gamma given
/// the realised filter state, then Y_t from the observation equation.
SimulatedTrajectory simulate_trajectory(const ModelParams& params,
                                        std::span<const Exposure> exogenous, Rng& rng,
                                        std::string id = {});

}  // namespace gssm
