#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "gssm/errors.hpp"
#include "gssm/variance.hpp"
#include "mc.hpp"
#include "oracles.hpp"

using namespace gssm;

namespace {

std::vector<std::int64_t> ones(int n) { return std::vector<std::int64_t>(n, 1); }

std::vector<std::int64_t> random_exposures(Rng& rng, int n, int max_v = 4) {
    std::uniform_int_distribution<std::int64_t> d(0, max_v);
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("variance_step") {
    SUBCASE("static step keeps the variance") {
        for (double a : {1.5, 3.0, 40.0}) CHECK(*variance_step(0.37, a, 0.0, 1.0) == doctest::Approx(0.37).epsilon(1e-15));
    }
    SUBCASE("stationary coefficients keep 1/(a_init - 1)") {
        for (double a1 : {1.2, 3.0, 8.0})
            for (double delta : {0.1, 0.5, 0.95}) {
                const ModelParams p{a1, 1.0, Stationary{delta}};
                FilterState s;
                s.filtered = true;
                for (double a : {a1, a1 + 0.5, a1 + 7.0}) {
                    s.a_post = a;
                    const auto c = resolve_coefficients(p, s);
                    const double v0 = 1.0 / (a1 - 1.0);
                    CHECK(oracle::rel_err(*variance_step(v0, a, c.p, c.q), v0) < 1e-12);
                }
            }
    }
    SUBCASE("divergence marker") {
        CHECK_FALSE(variance_step(1.0, 1.5, 0.0, 0.5).has_value());
        CHECK_FALSE(variance_step(1.0, 2.0, 0.0, 0.5).has_value());
        CHECK(variance_step(1.0, 2.5, 0.0, 0.5).has_value());
    }
}

TEST_CASE("inverse_gamma_variance") {
    CHECK(inverse_gamma_variance(3.0, 3.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(inverse_gamma_variance(1.0, 1.0), DomainError);
}

TEST_CASE("stationary regime: constant variance path") {
    Rng rng = make_rng(1);
    for (double a1 : {1.1, 3.0, 6.5})
        for (double delta : {0.05, 0.3, 0.5, 0.9, 1.0})
            for (double psi : {0.3, 1.0, 2.5}) {
                const auto v = random_exposures(rng, 40);
                const auto path = variance_path({a1, psi, Stationary{delta}}, v, 40);
                REQUIRE(path.records.size() == 40);
                CHECK_FALSE(path.diverged());
                for (const auto& r : path.records)
                    CHECK(oracle::rel_err(*r.variance, 1.0 / (a1 - 1.0)) < 1e-10);
                CHECK(classify_regime_behavior(path) == VarianceBehavior::Stationary);
            }
}

TEST_CASE("variance_path preconditions") {
    CHECK_THROWS_AS(variance_path({0.9, 1.0, Stationary{0.5}}, ones(5), 5), DomainError);
    CHECK_THROWS_AS(variance_path({3.0, 1.0, Stationary{0.5}}, ones(3), 5), DomainError);
    const auto path = variance_path({3.0, 1.0, Static{}}, ones(5), 5);
    CHECK(*path.records.front().variance == doctest::Approx(0.5));
    CHECK(path.records.front().a_pred == 3.0);
    CHECK(path.records.front().a_post == 4.0);
    CHECK_THROWS_AS(classify_regime_behavior(VariancePath{{path.records[0], path.records[1]}}),
                    DomainError);
}

TEST_CASE("decreasing regime: monotone, strict exactly when p > 0") {
    Rng rng = make_rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        Custom c;
        for (int t = 0; t < 25; ++t) {
            const double p = u(rng) < 0.25 ? 0.0 : 0.95 * u(rng);
            c.p.push_back(p);
            c.q.push_back(1.0 - p);
        }
        const ModelParams params{1.05 + 5.0 * u(rng), 0.3 + 2.0 * u(rng), c};
        const auto v = random_exposures(rng, 25);
        const auto path = variance_path(params, v, 25);
        std::int64_t seen = 0;
        for (std::size_t k = 0; k + 1 < path.records.size(); ++k) {
            seen += v[k];
            const double cur = *path.records[k].variance, next = *path.records[k + 1].variance;
            // before any exposure b_t is deterministic, Var = 1/(a - 1) and the step is flat
            if (seen == 0)
                CHECK(oracle::rel_err(next, cur) < 1e-12);
            else if (c.p[k] > 1e-12)
                CHECK(next < cur);
            else
                CHECK(oracle::rel_err(next, cur) < 1e-12);
        }
    }
    const auto dec = variance_path({3.0, 1.0, Decreasing{0.4}}, ones(20), 20);
    CHECK(classify_regime_behavior(dec) == VarianceBehavior::Decreasing);
    const auto flat = variance_path({3.0, 1.0, Decreasing{0.0}}, ones(20), 20);
    CHECK(classify_regime_behavior(flat) == VarianceBehavior::Stationary);
}

TEST_CASE("decreasing regime: vanishing variance and the explicit bound") {
    // q = 0.5: q^2 = 0.25 lies in (delta, 1 - delta) for delta = 0.2
    const double delta = 0.2, a1 = 3.0;
    const int horizon = 4000;
    const auto path = variance_path({a1, 1.0, Decreasing{0.5}}, ones(horizon), horizon);
    const auto first = path.first_below(1e-3);
    REQUIRE(first.has_value());
    MESSAGE("decreasing regime: Var < 1e-3 first at t = " << *first);
    for (int t : {1, 2, 5, 10, 50, 200})
        for (int s : {1, 3, 10, 40, 100}) {
            if (t + s > horizon) continue;
            const double bound = std::pow(1.0 - delta, s) / (a1 - 1.0) +
                                 (1.0 - delta) / delta / (path.records[t - 1].a_post - 1.0);
            CAPTURE(t);
            CAPTURE(s);
            CHECK(*path.records[t + s - 1].variance <= bound);
        }
}

TEST_CASE("Smith-Miller: non-decreasing, strict for gamma < 1") {
    Rng rng = make_rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double gamma = 0.05 + 0.9 * u(rng);
        const ModelParams p{1.05 + 6.0 * u(rng), 0.3 + 2.0 * u(rng), SmithMiller{gamma}};
        std::vector<std::int64_t> v = random_exposures(rng, 30);
        for (auto& x : v) x = std::max<std::int64_t>(x, 1);
        const auto path = variance_path(p, v, 30);
        for (std::size_t k = 0; k + 1 < path.records.size(); ++k) {
            if (!path.records[k + 1].variance) break;
            CHECK(*path.records[k + 1].variance > *path.records[k].variance);
        }
        const auto b = classify_regime_behavior(path);
        CHECK((b == VarianceBehavior::Increasing || b == VarianceBehavior::Diverging));
    }
    const auto unit = variance_path({3.0, 1.0, SmithMiller{1.0}}, ones(10), 10);
    for (const auto& r : unit.records) CHECK(*r.variance == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("p = 0, q = 0.5 with unit exposure: the variance blows up") {
    Custom c;
    c.p.assign(200, 0.0);
    c.q.assign(200, 0.5);
    const auto path = variance_path({3.0, 1.0, c}, ones(200), 200);
    CHECK(classify_regime_behavior(path) == VarianceBehavior::Diverging);
    const auto t = path.first_exceeding(1e3);
    REQUIRE(t.has_value());
    MESSAGE("variance exceeds 1e3 at t = " << *t);
}

TEST_CASE("write_variance_path") {
    Custom c;
    c.p.assign(5, 0.0);
    c.q.assign(5, 0.2);  // (p + q) a_1 = 0.8 <= 1: no finite variance from t = 2
    std::ostringstream out;
    const auto path = variance_path({3.0, 1.0, c}, ones(5), 5);
    write_variance_path(out, path);
    const std::string s = out.str();
    CHECK(s.rfind("t,var,a_t,p_t,q_t\n1,0.5,4,0,0.2\n2,diverged,", 0) == 0);
    CHECK(path.diverged());
    CHECK(*path.first_exceeding(1e3) == 2);
    CHECK(classify_regime_behavior(path) == VarianceBehavior::Diverging);
}

TEST_CASE("Smith-Miller conditional variance scaling") {
    SUBCASE("hand example: ratio exactly two") {
        FilterState s;
        s.filtered = true;
        s.a_post = 3.0;
        s.b_post = 2.0;
        const auto n = advance({3.0, 1.0, SmithMiller{0.5}}, s);
        CHECK(n.a_pred == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(n.b_pred == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
        CHECK(inverse_gamma_variance(n.a_pred, n.b_pred) / inverse_gamma_variance(3.0, 2.0) ==
              doctest::Approx(2.0).epsilon(1e-14));
    }
    Rng rng = make_rng(4);
    std::vector<Exposure> exo;
    for (int t = 0; t < 10; ++t) exo.push_back({1 + t % 3, 2000.0 + 100.0 * t});
    SUBCASE("gamma = 1 keeps the conditional variance") {
        const auto r = smith_miller_conditional_scaling_check({2.0, 1.0, SmithMiller{1.0}}, exo, 20, rng);
        CHECK(r.passed);
        CHECK(r.max_relative_error < 1e-12);
    }
    SUBCASE("1000 states, gamma = 0.8") {
        const auto r = smith_miller_conditional_scaling_check({2.0, 0.9, SmithMiller{0.8}}, exo, 100, rng);
        CHECK(r.states_checked == 1000);
        CHECK(r.passed);
        CHECK(r.max_relative_error < 1e-10);
    }
    CHECK_THROWS_AS(smith_miller_conditional_scaling_check({2.0, 1.0, Static{}}, exo, 1, rng), DomainError);
}

TEST_CASE("Monte Carlo agrees with the recursion, stationary setting, 20 periods") {
    const ModelParams p{3.0, 1.0, Stationary{0.5}};
    const auto inv = mc::inverse_theta(p, mc::unit_exposures(20, 3000.0), 1'000'000, 31);
    const auto path = variance_path(p, ones(20), 20);
    for (std::size_t t = 0; t < inv.size(); ++t) {
        const auto m = oracle::moments(inv[t]);
        CAPTURE(t + 1);
        CHECK(oracle::within_se(m.var, *path.records[t].variance, m.var_se));
    }
}

TEST_CASE("Monte Carlo agrees with the recursion in every regime") {
    // Random draws are kept only where a_{t|t-1} > 3 for all t <= 10, so that
    // 1/Theta_t has a finite fourth moment and the variance SE is meaningful.
    Rng rng = make_rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int horizon = 10;
    std::uint64_t seed = 1000;
    oracle::ZFamily family;
    for (int regime = 0; regime < 4; ++regime) {
        int accepted = 0;
        while (accepted < 10) {
            Regime r;
            switch (regime) {
                case 0: r = Stationary{0.1 + 0.9 * u(rng)}; break;
                case 1: r = SmithMiller{0.5 + 0.5 * u(rng)}; break;
                case 2: r = Decreasing{0.8 * u(rng)}; break;
                default: r = Static{}; break;
            }
            const ModelParams p{3.5 + 6.0 * u(rng), 0.5 + 1.5 * u(rng), r};
            std::vector<Exposure> exo;
            std::vector<std::int64_t> v;
            for (int t = 0; t < horizon; ++t) {
                v.push_back(1 + static_cast<std::int64_t>(3 * u(rng)));
                exo.push_back({v.back(), 1000.0 + 3000.0 * u(rng)});
            }
            const auto path = variance_path(p, v, horizon);
            bool ok = true;
            for (const auto& rec : path.records) ok = ok && rec.a_pred > 3.0;
            if (!ok) continue;
            ++accepted;
            const auto inv = mc::inverse_theta(p, exo, 100'000, seed++);
            for (int t = 0; t < horizon; ++t) {
                const auto m = oracle::moments(inv[t]);
                CAPTURE(regime_name(p.regime));
                CAPTURE(p.a_init);
                CAPTURE(t + 1);
                family.add(m.var, *path.records[t].variance, m.var_se);
                CHECK(std::abs(m.var - *path.records[t].variance) <= 4.5 * m.var_se);
            }
        }
    }
    MESSAGE(family.n << " comparisons, " << family.exceed3 << " beyond 3 SE, max |z| = "
                     << family.max_abs_z);
    CHECK(family.n == 400);
    CHECK(family.exceed3 <= 5);
}
