#include "gssm/variance.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "gssm/errors.hpp"

namespace gssm {

std::optional<double> variance_step(double variance, double a_post, double p, double q) {
    const double s = p + q;
    const double denom = s * a_post - 1.0;
    if (!(denom > 0.0)) return std::nullopt;
    const double w = q * q / s;
    const double next = w * (a_post - 1.0) / denom * variance + (1.0 - w) / denom;
    if (!std::isfinite(next)) return std::nullopt;
    return next;
}

double inverse_gamma_variance(double a, double b) {
    if (!(a > 1.0)) throw DomainError("Var(1/Theta) is finite only for a > 1");
    return b * b / (a * a * (a - 1.0));
}

bool VariancePath::diverged() const {
    return std::any_of(records.begin(), records.end(),
                       [](const VarianceRecord& r) { return !r.variance; });
}

std::optional<int> VariancePath::first_exceeding(double level) const {
    for (const auto& r : records)
        if (!r.variance || *r.variance > level) return r.t;
    return std::nullopt;
}

std::optional<int> VariancePath::first_below(double level) const {
    for (const auto& r : records)
        if (r.variance && *r.variance < level) return r.t;
    return std::nullopt;
}

VariancePath variance_path(const ModelParams& params, std::span<const std::int64_t> exposures,
                           int horizon) {
    validate(params);
    if (!(params.a_init > 1.0))
        throw DomainError("variance_path requires a_init > 1 for a finite initial variance");
    if (horizon < 1 || exposures.size() < static_cast<std::size_t>(horizon))
        throw DomainError("variance_path: need one exposure per period up to the horizon");

    VariancePath path;
    path.records.reserve(static_cast<std::size_t>(horizon));
    std::optional<double> var = 1.0 / (params.a_init - 1.0);
    FilterState s;
    s.a_pred = params.a_init;
    s.b_pred = params.a_init;
    for (int t = 1; t <= horizon; ++t) {
        s.t = t;
        s.a_post = s.a_pred + static_cast<double>(exposures[t - 1]) / params.dispersion;
        s.b_post = s.a_post;  // only a enters the coefficients and the recursion
        s.filtered = true;
        const Coefficients c = resolve_coefficients(params, s);
        path.records.push_back({t, var, s.a_pred, s.a_post, c.p, c.q});
        if (var) var = variance_step(*var, s.a_post, c.p, c.q);
        s.a_pred = (c.p + c.q) * s.a_post;
    }
    return path;
}

const char* to_string(VarianceBehavior b) {
    switch (b) {
        case VarianceBehavior::Stationary: return "stationary";
        case VarianceBehavior::Increasing: return "increasing";
        case VarianceBehavior::Decreasing: return "decreasing";
        case VarianceBehavior::Diverging: return "diverging";
        case VarianceBehavior::Mixed: return "mixed";
    }
    return "unknown";
}

VarianceBehavior classify_regime_behavior(const VariancePath& path) {
    if (path.records.size() < 3)
        throw DomainError("classify_regime_behavior needs at least three periods");
    for (const auto& r : path.records)
        if (!r.variance || *r.variance > 1e12) return VarianceBehavior::Diverging;

    bool up = false, down = false;
    for (std::size_t k = 1; k < path.records.size(); ++k) {
        const double prev = *path.records[k - 1].variance;
        const double cur = *path.records[k].variance;
        const double tol = 1e-9 * std::max({1.0, std::abs(prev), std::abs(cur)});
        if (cur - prev > tol) up = true;
        if (prev - cur > tol) down = true;
    }
    if (up && down) return VarianceBehavior::Mixed;
    if (up) return VarianceBehavior::Increasing;
    if (down) return VarianceBehavior::Decreasing;
    return VarianceBehavior::Stationary;
}

void write_variance_path(std::ostream& out, const VariancePath& path) {
    const auto old = out.precision(12);
    out << "t,var,a_t,p_t,q_t\n";
    for (const auto& r : path.records) {
        out << r.t << ',';
        if (r.variance)
            out << *r.variance;
        else
            out << "diverged";
        out << ',' << r.a_post << ',' << r.p << ',' << r.q << '\n';
    }
    out.precision(old);
}

ScalingReport smith_miller_conditional_scaling_check(const ModelParams& params,
                                                     std::span<const Exposure> exogenous,
                                                     int n_paths, Rng& rng, double tolerance) {
    const auto* sm = std::get_if<SmithMiller>(&params.regime);
    if (!sm) throw DomainError("conditional scaling check applies to the Smith-Miller regime only");
    ScalingReport report;
    for (int i = 0; i < n_paths; ++i) {
        const auto sim = simulate_trajectory(params, exogenous, rng);
        const auto states = run_filter(params, sim.trajectory);
        for (const auto& st : states) {
            if (!(st.a_post > 1.0)) throw DomainError("conditional scaling check requires a_t > 1");
            const FilterState next = advance(params, st);
            const double filtered_var = inverse_gamma_variance(st.a_post, st.b_post);
            const double predictive_var = inverse_gamma_variance(next.a_pred, next.b_pred);
            const double expected = filtered_var / sm->gamma;
            const double rel = std::abs(predictive_var - expected) / expected;
            report.max_relative_error = std::max(report.max_relative_error, rel);
            ++report.states_checked;
        }
    }
    report.passed = report.states_checked > 0 && report.max_relative_error < tolerance;
    return report;
}

}  // namespace gssm
