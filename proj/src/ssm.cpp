#include "gssm/ssm.hpp"

#include <cmath>
#include <string>

#include "gssm/distributions.hpp"
#include "gssm/errors.hpp"

namespace gssm {

namespace {

constexpr double kFloor = 1e-300;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_floor(double a, double b, int t, const char* stage) {
    if (!(a >= kFloor) || !(b >= kFloor) || !std::isfinite(a) || !std::isfinite(b))
        throw NumericalError(std::string(stage) + ": state parameters left the positive range at t=" +
                             std::to_string(t) + " (a=" + std::to_string(a) +
                             ", b=" + std::to_string(b) + ")");
}

std::string period_tag(const Trajectory& traj, std::size_t k) {
    return "trajectory '" + traj.id + "' period " + std::to_string(k + 1);
}

}  // namespace

std::string regime_name(const Regime& regime) {
    return std::visit(overloaded{
                          [](const SmithMiller&) { return std::string("smith-miller"); },
                          [](const Stationary&) { return std::string("stationary"); },
                          [](const Decreasing&) { return std::string("decreasing"); },
                          [](const Static&) { return std::string("static"); },
                          [](const Custom&) { return std::string("custom"); },
                      },
                      regime);
}

void validate(const ModelParams& params) {
    if (!(params.a_init > 0.0) || !std::isfinite(params.a_init))
        throw DomainError("a_init must be positive");
    if (!(params.dispersion > 0.0) || !std::isfinite(params.dispersion))
        throw DomainError("dispersion psi must be positive");
    std::visit(overloaded{
                   [&](const SmithMiller& r) {
                       if (!(r.gamma > 0.0 && r.gamma <= 1.0))
                           throw DomainError("Smith-Miller gamma must lie in (0, 1]");
                       if (!(params.a_init > 1.0))
                           throw DomainError("Smith-Miller regime requires a_init > 1");
                   },
                   [&](const Stationary& r) {
                       if (!(r.delta > 0.0 && r.delta <= 1.0))
                           throw DomainError("stationary Delta must lie in (0, 1]");
                   },
                   [&](const Decreasing& r) {
                       if (!(r.p >= 0.0 && r.p < 1.0))
                           throw DomainError("decreasing regime p must lie in [0, 1)");
                   },
                   [](const Static&) {},
                   [](const Custom& r) {
                       if (r.p.size() != r.q.size())
                           throw DomainError("custom regime p and q schedules differ in length");
                       for (std::size_t k = 0; k < r.p.size(); ++k) {
                           if (!(r.p[k] >= 0.0 && r.p[k] <= 1.0))
                               throw DomainError("custom p_" + std::to_string(k + 1) +
                                                 " outside [0, 1]");
                           if (!(r.q[k] > 0.0) || !std::isfinite(r.q[k]))
                               throw DomainError("custom q_" + std::to_string(k + 1) +
                                                 " must be positive");
                       }
                   },
               },
               params.regime);
}

void validate(const Trajectory& traj) {
    for (std::size_t k = 0; k < traj.periods.size(); ++k) {
        const Period& p = traj.periods[k];
        if (p.v < 0) throw DomainError(period_tag(traj, k) + ": negative exposure");
        if (!(p.y >= 0.0) || !std::isfinite(p.y))
            throw DomainError(period_tag(traj, k) + ": response must be a nonnegative number");
        if (p.v == 0 && p.y != 0.0)
            throw InconsistentObservation(period_tag(traj, k) +
                                          ": positive response with zero exposure");
        if (p.v > 0 && p.y == 0.0)
            throw InconsistentObservation(period_tag(traj, k) +
                                          ": zero response with positive exposure");
        if (p.v > 0 && (!p.mu || !(*p.mu > 0.0) || !std::isfinite(*p.mu)))
            throw DomainError(period_tag(traj, k) + ": positive exposure requires mu > 0");
    }
}

FilterState init_state(const ModelParams& params) {
    validate(params);
    FilterState s;
    s.t = 1;
    s.a_pred = params.a_init;
    s.b_pred = params.a_init;
    return s;
}

FilterState filter_update(const FilterState& state, std::int64_t v, double mu, double y,
                          double psi) {
    if (!(psi > 0.0)) throw DomainError("filter_update: psi must be positive");
    if (v < 0) throw DomainError("filter_update: negative exposure");
    if (v == 0 && y != 0.0)
        throw InconsistentObservation("filter_update: positive response with zero exposure at t=" +
                                      std::to_string(state.t));
    if (v > 0 && !(y > 0.0))
        throw InconsistentObservation("filter_update: zero response with positive exposure at t=" +
                                      std::to_string(state.t));
    FilterState s = state;
    s.filtered = true;
    if (v == 0) {
        s.a_post = s.a_pred;
        s.b_post = s.b_pred;
        return s;
    }
    if (!(mu > 0.0)) throw DomainError("filter_update: mu must be positive when v > 0");
    s.a_post = s.a_pred + static_cast<double>(v) / psi;
    s.b_post = s.b_pred + y / (mu * psi);
    check_floor(s.a_post, s.b_post, s.t, "filter_update");
    return s;
}

FilterState filter_update(const FilterState& state, const Period& period, double psi) {
    return filter_update(state, period.v, period.mu.value_or(0.0), period.y, psi);
}

Coefficients resolve_coefficients(const ModelParams& params, const FilterState& state) {
    if (!state.filtered)
        throw DomainError("resolve_coefficients: state at t=" + std::to_string(state.t) +
                          " has not been filtered");
    const double a = state.a_post;
    return std::visit(
        overloaded{
            [&](const SmithMiller& r) {
                return Coefficients{0.0, (r.gamma * (a - 1.0) + 1.0) / a};
            },
            [&](const Stationary& r) {
                const double d = r.delta;
                const double q = d * params.a_init / (a - d * d * a + d * d * params.a_init);
                return Coefficients{r.kappa() * q, q};
            },
            [](const Decreasing& r) { return Coefficients{r.p, 1.0 - r.p}; },
            [](const Static&) { return Coefficients{0.0, 1.0}; },
            [&](const Custom& r) {
                const auto k = static_cast<std::size_t>(state.t - 1);
                if (k >= r.q.size())
                    throw DomainError("custom regime has no coefficients for period t=" +
                                      std::to_string(state.t));
                return Coefficients{r.p[k], r.q[k]};
            },
        },
        params.regime);
}

FilterState state_update(const FilterState& state, const Coefficients& c) {
    if (!state.filtered)
        throw DomainError("state_update: state at t=" + std::to_string(state.t) +
                          " has not been filtered");
    if (!(c.p >= 0.0) || !(c.q >= 0.0) || !(c.p + c.q > 0.0))
        throw DomainError("state_update: coefficients must satisfy p, q >= 0 and p + q > 0");
    FilterState next;
    next.t = state.t + 1;
    next.a_pred = (c.p + c.q) * state.a_post;
    next.b_pred = c.p * state.a_post + c.q * state.b_post;
    check_floor(next.a_pred, next.b_pred, next.t, "state_update");
    return next;
}

FilterState affine_update(const FilterState& state, const AffineCoefficients& xi) {
    if (!state.filtered)
        throw DomainError("affine_update: state at t=" + std::to_string(state.t) +
                          " has not been filtered");
    FilterState next;
    next.t = state.t + 1;
    next.a_pred = xi.xi1 + xi.xi2 * state.a_post + xi.xi3 * state.b_post;
    next.b_pred = xi.xi4 + xi.xi5 * state.a_post + xi.xi6 * state.b_post;
    check_floor(next.a_pred, next.b_pred, next.t, "affine_update");
    return next;
}

FilterState advance(const ModelParams& params, const FilterState& state) {
    return state_update(state, resolve_coefficients(params, state));
}

std::vector<FilterState> run_filter(const ModelParams& params, const Trajectory& traj) {
    validate(traj);
    std::vector<FilterState> out;
    out.reserve(traj.size());
    FilterState s = init_state(params);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (k > 0) s = advance(params, out.back());
        out.push_back(filter_update(s, traj.periods[k], params.dispersion));
    }
    return out;
}

FilterState next_predictive(const ModelParams& params, const Trajectory& traj) {
    if (traj.periods.empty()) return init_state(params);
    return advance(params, run_filter(params, traj).back());
}

SimulatedTrajectory simulate_trajectory(const ModelParams& params,
                                        std::span<const Exposure> exogenous, Rng& rng,
                                        std::string id) {
    FilterState s = init_state(params);
    const double psi = params.dispersion;
    SimulatedTrajectory out;
    out.trajectory.id = std::move(id);
    out.trajectory.periods.reserve(exogenous.size());
    out.theta.reserve(exogenous.size());
    for (std::size_t k = 0; k < exogenous.size(); ++k) {
        const Exposure& e = exogenous[k];
        if (e.v < 0) throw DomainError("simulate_trajectory: negative exposure");
        if (k > 0) s = advance(params, s);
        const double theta = gamma_sample({1.0 + s.a_pred, s.b_pred}, rng);
        Period period;
        period.v = e.v;
        if (e.mu > 0.0) period.mu = e.mu;
        if (e.v > 0) {
            if (!(e.mu > 0.0)) throw DomainError("simulate_trajectory: mu must be positive");
            const double shape = static_cast<double>(e.v) / psi;
            period.y = gamma_sample({shape, theta / (e.mu * psi)}, rng);
        }
        s = filter_update(s, period, psi);
        out.trajectory.periods.push_back(std::move(period));
        out.theta.push_back(theta);
    }
    return out;
}

}  // namespace gssm
