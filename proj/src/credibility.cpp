#include "gssm/credibility.hpp"

#include <ostream>

#include "gssm/errors.hpp"

namespace gssm {

namespace {

void check_next(std::int64_t v_next, double mu_next) {
    if (v_next < 0) throw DomainError("forecast: negative next-period exposure");
    if (!(mu_next > 0.0)) throw DomainError("forecast: next-period mu must be positive");
}

double normalised_observation(const Period& p) {
    return p.v > 0 ? p.y / (*p.mu * static_cast<double>(p.v)) : 0.0;
}

}  // namespace

CredibilityDecomposition decompose_weights(const CredibilityInputs& in) {
    if (in.v < 0 || !(in.psi > 0.0) || !(in.a_pred > 0.0))
        throw DomainError("decompose_weights: invalid filter context");
    if (!(in.delta > 0.0 && in.delta <= 1.0))
        throw DomainError("decompose_weights: Delta must lie in (0, 1]");
    check_next(in.v_next, in.mu_next);
    CredibilityDecomposition d;
    const double k = static_cast<double>(in.v) / in.psi;
    d.z = k / (in.a_pred + k);
    d.delta = in.delta;
    d.omega1 = in.delta * d.z;
    d.omega2 = in.delta * (1.0 - d.z);
    d.omega3 = 1.0 - in.delta;
    const double r = in.v > 0 ? in.y / (in.mu * static_cast<double>(in.v)) : 0.0;
    d.per_unit_mean =
        in.mu_next * (d.omega1 * r + d.omega2 * in.prior_inverse_mean + d.omega3);
    d.predicted_mean = static_cast<double>(in.v_next) * d.per_unit_mean;
    return d;
}

double predict_next_per_unit(const ModelParams& params, const FilterState& filtered,
                             double mu_next) {
    check_next(0, mu_next);
    const FilterState next = advance(params, filtered);
    return mu_next * next.b_pred / next.a_pred;
}

double predict_next(const ModelParams& params, const FilterState& filtered, std::int64_t v_next,
                    double mu_next) {
    check_next(v_next, mu_next);
    if (v_next == 0) return 0.0;
    return static_cast<double>(v_next) * predict_next_per_unit(params, filtered, mu_next);
}

double credibility_blend(const ModelParams& params, const FilterState& filtered,
                         std::int64_t v_next, double mu_next) {
    check_next(v_next, mu_next);
    const double delta = resolve_coefficients(params, filtered).delta();
    return static_cast<double>(v_next) * mu_next *
           (delta * filtered.posterior_inverse_mean() + (1.0 - delta));
}

ExpandedWeights expanded_weights(const ModelParams& params, const Trajectory& traj) {
    validate(params);
    validate(traj);
    const std::size_t t = traj.size();
    std::vector<double> w1(t), w2(t), w3(t);
    // a-sequence only: a_{s|s-1} -> a_s -> a_{s+1|s}
    FilterState s;
    s.a_pred = params.a_init;
    for (std::size_t k = 0; k < t; ++k) {
        s.t = static_cast<int>(k + 1);
        const double kv = static_cast<double>(traj.periods[k].v) / params.dispersion;
        const double z = kv / (s.a_pred + kv);
        s.a_post = s.a_pred + kv;
        s.b_post = s.a_post;
        s.filtered = true;
        const Coefficients c = resolve_coefficients(params, s);
        const double delta = c.delta();
        w1[k] = delta * z;
        w2[k] = delta * (1.0 - z);
        w3[k] = 1.0 - delta;
        s.a_pred = (c.p + c.q) * s.a_post;
    }
    ExpandedWeights out;
    out.observation.assign(t, 0.0);
    double tail = 1.0;  // prod_{k=s+1}^{t} w2_k
    for (std::size_t k = t; k-- > 0;) {
        out.observation[k] = tail * w1[k];
        out.prior += tail * w3[k];
        tail *= w2[k];
    }
    out.prior += tail;
    return out;
}

double expanded_prediction(const ModelParams& params, const Trajectory& traj,
                           std::int64_t v_next, double mu_next) {
    check_next(v_next, mu_next);
    const ExpandedWeights w = expanded_weights(params, traj);
    double m = w.prior;
    for (std::size_t k = 0; k < traj.size(); ++k)
        m += w.observation[k] * normalised_observation(traj.periods[k]);
    return static_cast<double>(v_next) * mu_next * m;
}

ForecastRow forecast_trajectory(const ModelParams& params, const Trajectory& traj,
                                std::int64_t v_next, double mu_next) {
    check_next(v_next, mu_next);
    ForecastRow row;
    row.id = traj.id;
    row.period = static_cast<int>(traj.size()) + 1;
    row.v_next = v_next;
    row.mu_next = mu_next;
    if (traj.periods.empty()) {
        row.prediction = static_cast<double>(v_next) * mu_next;
        return row;
    }
    const auto states = run_filter(params, traj);
    const FilterState& last = states.back();
    const Period& p = traj.periods.back();
    const auto d = decompose_weights({last.a_pred, p.v, params.dispersion,
                                      resolve_coefficients(params, last).delta(), p.y,
                                      p.mu.value_or(1.0), last.predictive_inverse_mean(), v_next,
                                      mu_next});
    row.prediction = predict_next(params, last, v_next, mu_next);
    row.omega1 = d.omega1;
    row.omega2 = d.omega2;
    row.omega3 = d.omega3;
    return row;
}

void write_forecast_table(std::ostream& out, const std::vector<ForecastRow>& rows) {
    const auto old = out.precision(12);
    out << "id,period,v_next,mu_next,prediction,omega1,omega2,omega3\n";
    for (const auto& r : rows)
        out << r.id << ',' << r.period << ',' << r.v_next << ',' << r.mu_next << ','
            << r.prediction << ',' << r.omega1 << ',' << r.omega2 << ',' << r.omega3 << '\n';
    out.precision(old);
}

}  // namespace gssm
