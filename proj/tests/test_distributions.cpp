#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gssm/distributions.hpp"
#include "gssm/errors.hpp"
#include "gssm/likelihood.hpp"
#include "oracles.hpp"

using namespace gssm;

TEST_CASE("gamma log-pdf at hand-evaluated points") {
    CHECK(gamma_log_pdf(1.0, {1.0, 1.0}) == doctest::Approx(-1.0).epsilon(1e-15));
    const double want = std::log(27.0 / 2.0) + 2.0 * std::log(2.0) - 6.0;
    CHECK(oracle::rel_err(gamma_log_pdf(2.0, {3.0, 3.0}), want) < 1e-14);
}

TEST_CASE("gamma log-pdf rejects bad input") {
    CHECK_THROWS_AS(gamma_log_pdf(0.0, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(gamma_log_pdf(-1.0, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(gamma_log_pdf(1.0, {0.0, 1.0}), DomainError);
    CHECK_THROWS_AS(gamma_log_pdf(1.0, {1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(gamma_log_pdf(1.0, {std::nan(""), 1.0}), DomainError);
}

TEST_CASE("log-pdfs integrate to one over a parameter grid") {
    SUBCASE("gamma") {
        for (double shape : {0.6, 1.0, 2.7, 9.5, 40.0})
            for (double rate : {0.4, 1.0, 7.0}) {
                auto f = [&](double x) { return x > 0 ? std::exp(gamma_log_pdf(x, {shape, rate})) : 0.0; };
                const double pivot = std::max(shape - 1.0, 0.5) / rate;
                CAPTURE(shape);
                CAPTURE(rate);
                CHECK(std::abs(oracle::integrate_positive(f, pivot) - 1.0) < 1e-8);
            }
    }
    SUBCASE("beta prime") {
        for (double s1 : {0.5, 1.0, 4.0, 12.0})
            for (double s2 : {1.3, 3.2, 10.0}) {
                auto f = [&](double x) {
                    return x > 0 ? std::exp(beta_prime_log_pdf(x, {s1, s2})) : 0.0;
                };
                CAPTURE(s1);
                CAPTURE(s2);
                CHECK(std::abs(oracle::integrate_positive(f, 1.0) - 1.0) < 1e-8);
            }
    }
    SUBCASE("lomax") {
        for (double shape : {1.2, 2.0, 6.0})
            for (double scale : {0.5, 30.0, 4000.0}) {
                auto f = [&](double y) {
                    return y > 0 ? std::exp(lomax_log_pdf(y, {shape, scale})) : 0.0;
                };
                CAPTURE(shape);
                CAPTURE(scale);
                CHECK(std::abs(oracle::integrate_positive(f, scale) - 1.0) < 1e-8);
            }
    }
}

TEST_CASE("gamma sampler matches moments for shape above and below one") {
    Rng rng = make_rng(20240601);
    struct Case {
        double shape, rate;
    };
    for (Case c : {Case{3.0, 3.0}, Case{0.3, 2.0}, Case{0.05, 1.0}, Case{25.0, 0.01}}) {
        std::vector<double> xs(1'000'000);
        for (auto& x : xs) x = gamma_sample({c.shape, c.rate}, rng);
        const auto m = oracle::moments(xs);
        CAPTURE(c.shape);
        CHECK(oracle::within_se(m.mean, c.shape / c.rate, m.mean_se, 5.0));
        CHECK(oracle::within_se(m.var, c.shape / (c.rate * c.rate), m.var_se, 5.0));
        CHECK(*std::min_element(xs.begin(), xs.end()) > 0.0);
        if (c.shape == 3.0) {
            CHECK(std::abs(m.mean - 1.0) < 0.005);
            CHECK(std::abs(m.var - 1.0 / 3.0) < 0.01);
        }
    }
}

TEST_CASE("gamma sampler: exponential special case passes a KS check") {
    Rng rng = make_rng(77);
    std::vector<double> xs(1'000'000);
    for (auto& x : xs) x = gamma_sample({1.0, 2.0}, rng);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = 1.0 - std::exp(-2.0 * xs[i]);
        d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
    }
    CHECK(d < 0.002);
}

TEST_CASE("gamma sampler is reproducible from the seed") {
    Rng a = make_rng(5, {1, 2});
    Rng b = make_rng(5, {1, 2});
    for (int i = 0; i < 100; ++i) CHECK(gamma_sample({0.7, 1.5}, a) == gamma_sample({0.7, 1.5}, b));
}

TEST_CASE("beta prime") {
    CHECK(oracle::rel_err(beta_prime_log_pdf(1.0, {1.0, 1.0}), std::log(0.25)) < 1e-14);
    CHECK_THROWS_AS(beta_prime_log_pdf(0.0, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(beta_prime_log_pdf(1.0, {0.0, 1.0}), DomainError);

    SUBCASE("normalised response of the predictive density") {
        // X = Y / (mu psi b) is Beta-prime(v/psi, a + 1); f_Y(y) = f_X(x) / (mu psi b)
        Rng rng = make_rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double a = 0.2 + 15.0 * u(rng), b = 0.1 + 10.0 * u(rng);
            const std::int64_t v = 1 + static_cast<std::int64_t>(9 * u(rng));
            const double psi = 0.2 + 4.0 * u(rng), mu = 100.0 + 4000.0 * u(rng);
            const double y = mu * v * std::exp(4.0 * u(rng) - 2.0);
            const double x = y / (mu * psi * b);
            const double via_x = beta_prime_log_pdf(x, {v / psi, a + 1.0}) - std::log(mu * psi * b);
            CHECK(oracle::rel_err(via_x, conditional_log_density(y, a, b, v, mu, psi)) < 1e-10);
        }
    }
}

TEST_CASE("lomax") {
    CHECK(oracle::rel_err(lomax_log_pdf(1e-300, {2.0, 1.0}), std::log(2.0)) < 1e-14);
    CHECK_THROWS_AS(lomax_log_pdf(1.0, {1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(lomax_log_pdf(1.0, {2.0, 0.0}), DomainError);
    CHECK_THROWS_AS(lomax_log_pdf(0.0, {2.0, 1.0}), DomainError);

    SUBCASE("equals the predictive density at v = 1, psi = 1") {
        Rng rng = make_rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const double a = 0.05 + 20.0 * u(rng), b = 0.05 + 10.0 * u(rng);
            const double mu = 50.0 + 5000.0 * u(rng);
            const double y = mu * std::exp(6.0 * u(rng) - 3.0);
            const double want = lomax_log_pdf(y, {a + 1.0, mu * b});
            CHECK(oracle::rel_err(conditional_log_density(y, a, b, 1, mu, 1.0), want) < 1e-12);
        }
    }
}

TEST_CASE("log_gamma agrees with known values") {
    CHECK(log_gamma(1.0) == 0.0);
    CHECK(log_gamma(2.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(oracle::rel_err(log_gamma(0.5), 0.5 * std::log(M_PI)) < 1e-14);
    CHECK(oracle::rel_err(log_gamma(101.0), 363.73937555556349014) < 1e-14);
    CHECK(oracle::rel_err(log_gamma(1e-6), 13.815509980749431669) < 1e-13);
}
