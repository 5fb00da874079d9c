#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "gssm/benchmarks.hpp"
#include "gssm/errors.hpp"
#include "gssm/estimation.hpp"
#include "gssm/likelihood.hpp"
#include "oracles.hpp"

using namespace gssm;

namespace {

std::vector<Trajectory> simulate(int M, double delta, std::uint64_t seed, int periods = 5) {
    SimulationScheme s;
    s.instances = M;
    s.periods = periods;
    s.holdout = false;
    s.model = stationary_params(3.0, 1.0, delta);
    return generate_dataset(s, seed).trajectories;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

TEST_CASE("fit recovers the generating parameters at M = 5000") {
    const auto data = simulate(5000, 0.5, 42);
    FitConfig cfg;
    const auto r = fit(data, cfg);
    CHECK(r.converged);
    CHECK(r.family == FitFamily::Stationary);
    CHECK_FALSE(r.at_boundary);
    // about four of the replication spreads (0.1228, 0.0135, 0.0234)
    CHECK(std::abs(r.a_init - 3.0) < 0.5);
    CHECK(std::abs(r.psi - 1.0) < 0.055);
    CHECK(std::abs(r.delta - 0.5) < 0.095);
    CHECK(r.n_trajectories == 5000);
    CHECK(r.n_effective_periods == count_effective_periods(data));
    CHECK(r.loglik == total_log_likelihood(to_model_params(r), data));
    // the optimum beats nearby points
    for (double da : {-0.05, 0.05})
        CHECK(total_log_likelihood(stationary_params(r.a_init + da, r.psi, r.delta), data) < r.loglik);
    for (double dd : {-0.01, 0.01})
        CHECK(total_log_likelihood(stationary_params(r.a_init, r.psi, r.delta + dd), data) < r.loglik);
}

TEST_CASE("Buhlmann family fixes Delta at one and nests inside the free fit") {
    const auto data = simulate(2000, 1.0, 7);
    FitConfig cfg;
    cfg.family = FitFamily::Buhlmann;
    const auto b = fit(data, cfg);
    CHECK(b.converged);
    CHECK(b.delta == 1.0);
    CHECK(std::holds_alternative<Static>(to_model_params(b).regime));

    cfg.family = FitFamily::Stationary;
    const auto s = fit(data, cfg);
    CHECK(s.converged);
    CHECK(s.loglik >= b.loglik);
    MESSAGE("Delta = 1 truth, free fit: Delta_hat = " << s.delta << ", boundary = " << s.at_boundary);
    if (s.at_boundary) {
        CHECK(s.delta == 1.0);
        CHECK(s.loglik == b.loglik);
    }
    if (s.delta > 0.999) CHECK(b.loglik >= s.loglik - 1e-6);
    CHECK(s.delta > 0.9);
}

TEST_CASE("fit input errors and diagnostics") {
    FitConfig cfg;
    std::vector<Trajectory> empty;
    CHECK_THROWS_AS(fit(empty, cfg), DataError);
    std::vector<Trajectory> zeros{Trajectory{"a", {Period{}, Period{}}}};
    CHECK_THROWS_AS(fit(zeros, cfg), DataError);
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(fit(simulate(10, 0.5, 1), cfg), DomainError);

    FitConfig capped;
    capped.max_iterations = 3;
    capped.restarts = 0;
    const auto r = fit(simulate(200, 0.5, 2), capped);
    CHECK_FALSE(r.converged);
    CHECK(std::isfinite(r.loglik));
}

TEST_CASE("fit is deterministic under the seed") {
    const auto data = simulate(300, 0.5, 3);
    FitConfig cfg;
    cfg.seed = 11;
    const auto a = fit(data, cfg), b = fit(data, cfg);
    CHECK(a.a_init == b.a_init);
    CHECK(a.psi == b.psi);
    CHECK(a.delta == b.delta);
    CHECK(a.loglik == b.loglik);
}

TEST_CASE("starting values are moment-based and in range") {
    const auto s = initial_guess(simulate(5000, 0.5, 4));
    CHECK(s.delta == 0.5);
    CHECK(s.psi > 0.5);
    CHECK(s.psi < 2.0);
    CHECK(s.a_init >= 1.05);
    CHECK(s.a_init <= 100.0);
}

TEST_CASE("estimation error shrinks as the portfolio grows") {
    // median absolute error over 20 replications; sqrt(10) ~ 3.2 expected from 500 to 5000
    const std::vector<int> sizes{500, 2000, 5000};
    std::vector<std::vector<double>> err_a(3), err_psi(3), err_delta(3);
    FitConfig cfg;
    cfg.restarts = 1;
    for (std::uint64_t r = 0; r < 20; ++r)
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            const auto f = fit(simulate(sizes[k], 0.5, 9000 + 10 * r + k), cfg);
            REQUIRE(f.converged);
            err_a[k].push_back(std::abs(f.a_init - 3.0));
            err_psi[k].push_back(std::abs(f.psi - 1.0));
            err_delta[k].push_back(std::abs(f.delta - 0.5));
        }
    for (const auto* errs : {&err_a, &err_psi, &err_delta}) {
        const double m0 = median((*errs)[0]), m1 = median((*errs)[1]), m2 = median((*errs)[2]);
        MESSAGE("median abs error: " << m0 << " -> " << m1 << " -> " << m2);
        CHECK(m1 < m0);
        CHECK(m2 < m1);
        CHECK(m0 / m2 > 2.0);
    }
}

TEST_CASE("bootstrap standard errors") {
    Rng rng = make_rng(5);
    FitConfig cfg;
    SUBCASE("B = 0 gives nothing") {
        const auto data = simulate(100, 0.5, 5);
        const auto f = fit(data, cfg);
        CHECK_FALSE(bootstrap_se(data, cfg, f, 0, rng).has_value());
        FitResult unconverged = f;
        unconverged.converged = false;
        CHECK_THROWS_AS(bootstrap_se(data, cfg, unconverged, 5, rng), DomainError);
    }
    SUBCASE("a single observation is flagged unreliable") {
        std::vector<Trajectory> one{Trajectory{"a", {Period{1, 3000.0, 2500.0, ""}}}};
        FitResult f;
        f.family = FitFamily::Stationary;
        f.a_init = 3.0;
        f.psi = 1.0;
        f.delta = 0.5;
        f.converged = true;
        f.n_trajectories = 1;
        f.n_effective_periods = 1;
        cfg.restarts = 0;
        const auto se = bootstrap_se(one, cfg, f, 5, rng);
        REQUIRE(se.has_value());
        CHECK_FALSE(se->reliable);
        CHECK(se->replicates == 5);
    }
    SUBCASE("Delta standard error matches the replication spread") {
        const int M = 1000;
        const auto data = simulate(M, 0.5, 6);
        const auto f = fit(data, cfg);
        REQUIRE(f.converged);
        const auto se = bootstrap_se(data, cfg, f, 50, rng);
        REQUIRE(se.has_value());
        const double reference = 0.0234 * std::sqrt(5000.0 / M);
        MESSAGE("bootstrap SE: a " << se->a_init << ", psi " << se->psi << ", delta " << se->delta
                                   << " (reference " << reference << ")");
        CHECK(se->failures == 0);
        CHECK(se->reliable);
        CHECK(se->delta > reference / 2.0);
        CHECK(se->delta < reference * 2.0);
    }
}

TEST_CASE("fit report round trip") {
    FitResult f;
    f.family = FitFamily::Stationary;
    f.a_init = 3.0279123456789012;
    f.psi = 1.0017;
    f.delta = 0.50270000000000004;
    f.loglik = -46530.501624673067;
    f.converged = true;
    f.iterations = 249;
    f.evaluations = 467;
    f.n_trajectories = 1000;
    f.n_effective_periods = 4998;
    f.bootstrap_se = BootstrapSE{0.12, 0.0135, 0.0234, 50, 1, false};
    std::stringstream ss;
    write_fit_report(ss, f);
    const auto g = read_fit_report(ss, "mem");
    CHECK(g.family == f.family);
    CHECK(g.a_init == f.a_init);
    CHECK(g.psi == f.psi);
    CHECK(g.delta == f.delta);
    CHECK(g.loglik == f.loglik);
    CHECK(g.converged);
    CHECK(g.iterations == 249);
    CHECK(g.n_effective_periods == 4998);
    REQUIRE(g.bootstrap_se.has_value());
    CHECK(g.bootstrap_se->delta == 0.0234);
    CHECK(g.bootstrap_se->failures == 1);

    std::stringstream bad("family=stationary\na_init=abc\npsi=1\ndelta=0.5\n");
    CHECK_THROWS_WITH_AS(read_fit_report(bad, "p.txt"), doctest::Contains("p.txt"), DataError);
    std::stringstream missing("family=buhlmann\na_init=2\n");
    CHECK_THROWS_WITH_AS(read_fit_report(missing, "q.txt"), doctest::Contains("psi"), DataError);
    std::stringstream range("family=stationary\na_init=2\npsi=1\ndelta=1.5\n");
    CHECK_THROWS_AS(read_fit_report(range, "r.txt"), DataError);
}
