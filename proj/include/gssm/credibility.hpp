#pragma once

// One-step forecasts and their evolutionary-credibility decomposition.
//
// With R_t = Y_t / (mu_t v_t) (defined as 0 when v_t = 0), m_t = E[1/Theta_t | Y_{1:t-1}],
// z_t = (v_t/psi) / (a_{t|t-1} + v_t/psi) and Delta_t = q_t / (p_t + q_t):
//   E[Y_{t+1} | Y_{1:t}] = v_{t+1} mu_{t+1} (w1 R_t + w2 m_t + w3),
//   w1 = Delta_t z_t, w2 = Delta_t (1 - z_t), w3 = 1 - Delta_t.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gssm/ssm.hpp"

namespace gssm {

struct CredibilityDecomposition {
    double z = 0.0;
    double delta = 1.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double omega3 = 0.0;
    double per_unit_mean = 0.0;   ///< mu_{t+1} E[1/Theta_{t+1} | Y_{1:t}]
    double predicted_mean = 0.0;  ///< v_{t+1} * per_unit_mean
};

struct CredibilityInputs {
    double a_pred;               ///< a_{t|t-1}
    std::int64_t v;              ///< v_t
    double psi;
    double delta;                ///< Delta_t
    double y;                    ///< Y_t
    double mu;                   ///< mu_t (ignored when v = 0)
    double prior_inverse_mean;   ///< m_t = E[1/Theta_t | Y_{1:t-1}]
    std::int64_t v_next;
    double mu_next;
};

CredibilityDecomposition decompose_weights(const CredibilityInputs& in);

/// v mu b_{t+1|t} / a_{t+1|t} from the filtered state at t.
double predict_next(const ModelParams& params, const FilterState& filtered, std::int64_t v_next,
                    double mu_next);
double predict_next_per_unit(const ModelParams& params, const FilterState& filtered,
                             double mu_next);

/// v mu (Delta_t E[1/Theta_t | Y_{1:t}] + 1 - Delta_t).
double credibility_blend(const ModelParams& params, const FilterState& filtered,
                         std::int64_t v_next, double mu_next);

/// Weights on R_1..R_t and on the unit prior mean in the fully expanded form;
/// they depend on the exposures only.
struct ExpandedWeights {
    std::vector<double> observation;  ///< [prod_{k>s} w2_k] * w1_s, index s-1
    double prior = 0.0;               ///< sum of the w3 terms plus prod of all w2
};

ExpandedWeights expanded_weights(const ModelParams& params, const Trajectory& traj);

/// Prediction from the expanded product-sum form, computed from the
/// a-sequence and normalised observations only (no b recursion).
double expanded_prediction(const ModelParams& params, const Trajectory& traj,
                           std::int64_t v_next, double mu_next);

struct ForecastRow {
    std::string id;
    int period = 0;  ///< t + 1
    std::int64_t v_next = 0;
    double mu_next = 0.0;
    double prediction = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double omega3 = 1.0;
};

/// Filters the whole trajectory and forecasts the following period. For an
/// empty trajectory the weights are (0, 0, 1) and the forecast is v mu.
ForecastRow forecast_trajectory(const ModelParams& params, const Trajectory& traj,
                                std::int64_t v_next, double mu_next);

void write_forecast_table(std::ostream& out, const std::vector<ForecastRow>& rows);

}  // namespace gssm
