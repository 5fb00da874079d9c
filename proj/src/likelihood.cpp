#include "gssm/likelihood.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gssm/distributions.hpp"
#include "gssm/errors.hpp"
#include "gssm/parallel.hpp"

namespace gssm {

double conditional_log_density(double y, double a_pred, double b_pred, std::int64_t v,
                               double mu, double psi) {
    if (!(y > 0.0) || !std::isfinite(y))
        throw DomainError("conditional_log_density: y must be positive");
    if (v < 1) throw DomainError("conditional_log_density: v must be at least 1");
    if (!(mu > 0.0) || !(psi > 0.0) || !(a_pred > 0.0) || !(b_pred > 0.0))
        throw DomainError("conditional_log_density: mu, psi, a and b must be positive");
    const double k = static_cast<double>(v) / psi;
    const double x = y / (mu * psi);
    const double log_x = std::log(x);
    const double log_b = std::log(b_pred);
    // log(x + b) without cancellation when one term dominates
    const double log_xb = log_x > log_b ? log_x + std::log1p(b_pred / x)
                                        : log_b + std::log1p(x / b_pred);
    return log_gamma(k + a_pred + 1.0) - log_gamma(k) - log_gamma(a_pred + 1.0) +
           k * (log_x - log_xb) + (a_pred + 1.0) * (log_b - log_xb) - std::log(y);
}

double trajectory_log_likelihood(const ModelParams& params, const Trajectory& traj) {
    double ll = 0.0;
    FilterState s = init_state(params);
    const double psi = params.dispersion;
    for (std::size_t k = 0; k < traj.periods.size(); ++k) {
        const Period& p = traj.periods[k];
        if (k > 0) s = advance(params, s);
        if (p.v > 0) {
            if (!p.mu)
                throw DomainError("trajectory '" + traj.id + "' period " + std::to_string(k + 1) +
                                  ": positive exposure requires mu");
            ll += conditional_log_density(p.y, s.a_pred, s.b_pred, p.v, *p.mu, psi);
        }
        s = filter_update(s, p, psi);
    }
    return ll;
}

LogLikelihood dataset_log_likelihood(const ModelParams& params,
                                     std::span<const Trajectory> dataset, unsigned threads) {
    LogLikelihood out;
    out.per_trajectory.resize(dataset.size());
    parallel_for(dataset.size(), threads, [&](std::size_t i) {
        out.per_trajectory[i] = trajectory_log_likelihood(params, dataset[i]);
    });
    out.total = std::accumulate(out.per_trajectory.begin(), out.per_trajectory.end(), 0.0);
    out.n_effective_periods = count_effective_periods(dataset);
    return out;
}

double total_log_likelihood(const ModelParams& params, std::span<const Trajectory> dataset) {
    double total = 0.0;
    for (const auto& traj : dataset) total += trajectory_log_likelihood(params, traj);
    return total;
}

std::int64_t count_effective_periods(std::span<const Trajectory> dataset) {
    std::int64_t n = 0;
    for (const auto& traj : dataset)
        for (const auto& p : traj.periods)
            if (p.v > 0) ++n;
    return n;
}

TailReport tail_index_check(double a_pred, double b_pred, std::int64_t v, double mu, double psi) {
    if (!(a_pred > 0.0)) throw DomainError("tail_index_check requires a_pred > 0");
    TailReport r;
    const double k = static_cast<double>(v) / psi;
    const double scale = mu * psi * b_pred;
    r.tail_index = -(a_pred + 2.0);
    const double log_const = log_gamma(k + a_pred + 1.0) - log_gamma(k) -
                             log_gamma(a_pred + 1.0) + (a_pred + 1.0) * std::log(scale);
    const double y = 1e6 * scale;
    const double log_eval =
        conditional_log_density(y, a_pred, b_pred, v, mu, psi) + (a_pred + 2.0) * std::log(y);
    r.limit_constant = std::exp(log_const);
    r.evaluated = std::exp(log_eval);
    r.relative_error = std::abs(std::expm1(log_eval - log_const));
    r.mean_finite = a_pred > 0.0;
    r.variance_finite = a_pred > 1.0;
    r.passed = r.relative_error < 1e-3;
    return r;
}

}  // namespace gssm
