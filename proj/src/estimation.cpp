#include "gssm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "gssm/errors.hpp"
#include "gssm/likelihood.hpp"
#include "gssm/optimizer.hpp"
#include "gssm/parallel.hpp"

namespace gssm {

namespace {

constexpr double kTransformBound = 25.0;

double clamp_unconstrained(double u) { return std::clamp(u, -kTransformBound, kTransformBound); }
double from_log(double u) { return std::exp(clamp_unconstrained(u)); }
double from_logit(double u) { return 1.0 / (1.0 + std::exp(-clamp_unconstrained(u))); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double negative_log_likelihood(const ModelParams& params, std::span<const Trajectory> dataset) {
    try {
        return -total_log_likelihood(params, dataset);
    } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
    } catch (const DomainError&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct FamilyRun {
    NelderMeadResult nm;
    double a_init, psi, delta;
};

FamilyRun fit_buhlmann(std::span<const Trajectory> dataset, const StartingPoint& start,
                       const FitConfig& config, Rng& rng) {
    const Objective objective = [&](std::span<const double> u) {
        return negative_log_likelihood({from_log(u[0]), from_log(u[1]), Static{}}, dataset);
    };
    NelderMeadOptions opts{config.tolerance, config.max_iterations, 0.5};
    auto nm = minimize_with_restarts(objective, {std::log(start.a_init), std::log(start.psi)},
                                     opts, config.restarts, rng);
    return {nm, from_log(nm.x[0]), from_log(nm.x[1]), 1.0};
}

FamilyRun fit_stationary(std::span<const Trajectory> dataset, const StartingPoint& start,
                         const FitConfig& config, Rng& rng) {
    const Objective objective = [&](std::span<const double> u) {
        return negative_log_likelihood(
            {from_log(u[0]), from_log(u[1]), Stationary{from_logit(u[2])}}, dataset);
    };
    NelderMeadOptions opts{config.tolerance, config.max_iterations, 0.5};
    auto nm = minimize_with_restarts(
        objective, {std::log(start.a_init), std::log(start.psi), logit(start.delta)}, opts,
        config.restarts, rng);
    return {nm, from_log(nm.x[0]), from_log(nm.x[1]), from_logit(nm.x[2])};
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

const char* to_string(FitFamily family) {
    return family == FitFamily::Buhlmann ? "buhlmann" : "stationary";
}

ModelParams stationary_params(double a_init, double psi, double delta) {
    return {a_init, psi, Stationary{delta}};
}

ModelParams to_model_params(const FitResult& fit) {
    if (fit.family == FitFamily::Buhlmann) return {fit.a_init, fit.psi, Static{}};
    return stationary_params(fit.a_init, fit.psi, fit.delta);
}

StartingPoint initial_guess(std::span<const Trajectory> dataset) {
    std::vector<double> all;
    std::vector<double> first;
    double inv_v_first = 0.0;
    for (const auto& traj : dataset) {
        for (std::size_t k = 0; k < traj.periods.size(); ++k) {
            const Period& p = traj.periods[k];
            if (p.v <= 0 || !p.mu) continue;
            const double r = p.y / (static_cast<double>(p.v) * *p.mu);
            all.push_back(r);
            if (k == 0) {
                first.push_back(r);
                inv_v_first += 1.0 / static_cast<double>(p.v);
            }
        }
    }
    auto moments = [](const std::vector<double>& xs) {
        double m = 0.0, s2 = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        for (double x : xs) s2 += (x - m) * (x - m);
        s2 /= static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);
        return std::pair{m, s2};
    };
    StartingPoint start{3.0, 1.0, 0.5};
    if (all.size() >= 2) {
        auto [m, s2] = moments(all);
        if (m > 0.0) start.psi = std::clamp(s2 / (m * m), 0.05, 20.0);
    }
    if (first.size() >= 2) {
        auto [m, s2] = moments(first);
        if (m > 0.0) {
            // Var(R_1) = psi E[1/v] a/(a-1) + 1/(a-1) with R normalised to unit mean
            const double cv2 = s2 / (m * m);
            const double psi_term = start.psi * inv_v_first / static_cast<double>(first.size());
            if (cv2 - psi_term > 1e-3) start.a_init = (1.0 + cv2) / (cv2 - psi_term);
        }
    }
    start.a_init = std::clamp(start.a_init, 1.05, 100.0);
    return start;
}

FitResult fit(std::span<const Trajectory> dataset, const FitConfig& config) {
    if (dataset.empty()) throw DataError("fit: dataset is empty");
    const std::int64_t effective = count_effective_periods(dataset);
    if (effective == 0) throw DataError("fit: dataset has no period with positive exposure");
    if (!(config.tolerance > 0.0)) throw DomainError("fit: tolerance must be positive");
    for (const auto& traj : dataset) validate(traj);

    const StartingPoint start = initial_guess(dataset);
    // Separate streams so the boundary fit is identical whichever family is requested.
    Rng boundary_rng = make_rng(config.seed, {static_cast<std::uint64_t>(FitFamily::Buhlmann)});
    Rng interior_rng = make_rng(config.seed, {static_cast<std::uint64_t>(FitFamily::Stationary)});

    FitResult result;
    result.family = config.family;
    result.n_trajectories = static_cast<std::int64_t>(dataset.size());
    result.n_effective_periods = effective;

    FamilyRun boundary = fit_buhlmann(dataset, start, config, boundary_rng);
    FamilyRun chosen = boundary;
    int iterations = boundary.nm.iterations, evaluations = boundary.nm.evaluations;
    if (config.family == FitFamily::Stationary) {
        FamilyRun interior = fit_stationary(dataset, start, config, interior_rng);
        iterations += interior.nm.iterations;
        evaluations += interior.nm.evaluations;
        if (interior.nm.value < boundary.nm.value) {
            chosen = interior;
        } else {
            result.at_boundary = true;
        }
    }
    result.a_init = chosen.a_init;
    result.psi = chosen.psi;
    result.delta = chosen.delta;
    result.converged = chosen.nm.converged && std::isfinite(chosen.nm.value);
    result.iterations = iterations;
    result.evaluations = evaluations;
    // Re-evaluate at the reported parameters so loglik matches them exactly.
    result.loglik = std::isfinite(chosen.nm.value)
                        ? total_log_likelihood(to_model_params(result), dataset)
                        : -std::numeric_limits<double>::infinity();
    return result;
}

std::optional<BootstrapSE> bootstrap_se(std::span<const Trajectory> dataset,
                                        const FitConfig& config, const FitResult& fitted, int B,
                                        Rng& rng, unsigned threads) {
    if (B <= 0) return std::nullopt;
    if (!fitted.converged) throw DomainError("bootstrap_se requires a converged fit");
    const ModelParams truth = to_model_params(fitted);
    const std::uint64_t master = rng();

    struct Draw {
        bool ok = false;
        double a = 0.0, psi = 0.0, delta = 0.0;
    };
    std::vector<Draw> draws(static_cast<std::size_t>(B));
    parallel_for(draws.size(), threads, [&](std::size_t b) {
        Rng local = make_rng(master, {b});
        std::vector<Trajectory> sim;
        sim.reserve(dataset.size());
        for (const auto& traj : dataset) {
            std::vector<Exposure> exo;
            exo.reserve(traj.size());
            for (const auto& p : traj.periods) exo.push_back({p.v, p.mu.value_or(0.0)});
            sim.push_back(simulate_trajectory(truth, exo, local, traj.id).trajectory);
        }
        try {
            FitConfig cfg = config;
            cfg.family = fitted.family;
            cfg.seed = derive_seed(master, {b, 1});
            const FitResult r = fit(sim, cfg);
            if (r.converged) draws[b] = {true, r.a_init, r.psi, r.delta};
        } catch (const std::exception&) {
            // counted as a failure below
        }
    });

    std::vector<double> as, psis, deltas;
    BootstrapSE se;
    se.replicates = B;
    for (const auto& d : draws) {
        if (!d.ok) {
            ++se.failures;
            continue;
        }
        as.push_back(d.a);
        psis.push_back(d.psi);
        deltas.push_back(d.delta);
    }
    se.a_init = sample_sd(as);
    se.psi = sample_sd(psis);
    se.delta = fitted.family == FitFamily::Buhlmann ? 0.0 : sample_sd(deltas);
    se.reliable = se.failures == 0 && as.size() >= 2 && fitted.n_effective_periods >= 30 &&
                  std::isfinite(se.a_init) && std::isfinite(se.psi) && std::isfinite(se.delta);
    return se;
}

void write_fit_report(std::ostream& out, const FitResult& fit) {
    const auto old = out.precision(17);
    out << "family=" << to_string(fit.family) << '\n'
        << "a_init=" << fit.a_init << '\n'
        << "psi=" << fit.psi << '\n'
        << "delta=" << fit.delta << '\n'
        << "loglik=" << fit.loglik << '\n'
        << "converged=" << (fit.converged ? "true" : "false") << '\n'
        << "at_boundary=" << (fit.at_boundary ? "true" : "false") << '\n'
        << "iterations=" << fit.iterations << '\n'
        << "evaluations=" << fit.evaluations << '\n'
        << "n_trajectories=" << fit.n_trajectories << '\n'
        << "n_effective_periods=" << fit.n_effective_periods << '\n';
    if (fit.bootstrap_se) {
        const auto& se = *fit.bootstrap_se;
        out << "se_a_init=" << se.a_init << '\n'
            << "se_psi=" << se.psi << '\n'
            << "se_delta=" << se.delta << '\n'
            << "bootstrap_replicates=" << se.replicates << '\n'
            << "bootstrap_failures=" << se.failures << '\n'
            << "bootstrap_reliable=" << (se.reliable ? "true" : "false") << '\n';
    }
    out.precision(old);
}

FitResult read_fit_report(std::istream& in, const std::string& source_name) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError(source_name + ":" + std::to_string(lineno) + ": expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw DataError(source_name + ": missing key '" + key + "'");
        return it->second;
    };
    auto number = [&](const std::string& key) {
        const std::string& s = need(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw DataError(source_name + ": key '" + key + "' is not a number: '" + s + "'");
        }
    };
    auto flag = [&](const std::string& key) { return kv.count(key) && kv[key] == "true"; };

    FitResult r;
    const std::string& fam = need("family");
    if (fam == "buhlmann")
        r.family = FitFamily::Buhlmann;
    else if (fam == "stationary")
        r.family = FitFamily::Stationary;
    else
        throw DataError(source_name + ": unknown family '" + fam + "'");
    r.a_init = number("a_init");
    r.psi = number("psi");
    r.delta = number("delta");
    if (!(r.a_init > 0.0) || !(r.psi > 0.0) || !(r.delta > 0.0 && r.delta <= 1.0))
        throw DataError(source_name + ": parameters out of range");
    if (kv.count("loglik")) r.loglik = number("loglik");
    r.converged = flag("converged");
    r.at_boundary = flag("at_boundary");
    if (kv.count("iterations")) r.iterations = static_cast<int>(number("iterations"));
    if (kv.count("evaluations")) r.evaluations = static_cast<int>(number("evaluations"));
    if (kv.count("n_trajectories"))
        r.n_trajectories = static_cast<std::int64_t>(number("n_trajectories"));
    if (kv.count("n_effective_periods"))
        r.n_effective_periods = static_cast<std::int64_t>(number("n_effective_periods"));
    if (kv.count("se_a_init")) {
        BootstrapSE se;
        se.a_init = number("se_a_init");
        se.psi = number("se_psi");
        se.delta = number("se_delta");
        se.replicates = static_cast<int>(number("bootstrap_replicates"));
        se.failures = static_cast<int>(number("bootstrap_failures"));
        se.reliable = flag("bootstrap_reliable");
        r.bootstrap_se = se;
    }
    return r;
}

}  // namespace gssm
