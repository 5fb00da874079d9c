#include "gssm/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gssm/errors.hpp"

namespace gssm {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(what) + " must be a positive finite number, got " +
                          std::to_string(x));
}

}  // namespace

double log_gamma(double x) {
    if (!positive_finite(x)) throw DomainError("log_gamma: argument must be positive");
    return boost::math::lgamma(x);
}

void validate(const GammaParams& p) {
    if (!positive_finite(p.shape) || !positive_finite(p.rate))
        throw DomainError("Gamma parameters must satisfy shape > 0 and rate > 0");
}

void validate(const BetaPrimeParams& p) {
    if (!positive_finite(p.shape1) || !positive_finite(p.shape2))
        throw DomainError("Beta-prime parameters must both be positive");
}

void validate(const LomaxParams& p) {
    if (!(p.shape > 1.0) || !std::isfinite(p.shape) || !positive_finite(p.scale))
        throw DomainError("Lomax parameters must satisfy shape > 1 and scale > 0");
}

double gamma_log_pdf(double x, const GammaParams& p) {
    validate(p);
    require_positive(x, "gamma_log_pdf: x");
    return p.shape * std::log(p.rate) - log_gamma(p.shape) + (p.shape - 1.0) * std::log(x) -
           p.rate * x;
}

double gamma_mean(const GammaParams& p) {
    validate(p);
    return p.shape / p.rate;
}

double gamma_variance(const GammaParams& p) {
    validate(p);
    return p.shape / (p.rate * p.rate);
}

double gamma_sample(const GammaParams& p, Rng& rng) {
    validate(p);
    // libstdc++ implements Marsaglia-Tsang with the U^(1/shape) boost for
    // shape < 1; it is parameterised by scale.
    std::gamma_distribution<double> dist(p.shape, 1.0 / p.rate);
    double x = dist(rng);
    // Shapes far below one can underflow to exactly zero.
    if (x <= 0.0) x = std::numeric_limits<double>::denorm_min();
    return x;
}

double beta_prime_log_pdf(double x, const BetaPrimeParams& p) {
    validate(p);
    require_positive(x, "beta_prime_log_pdf: x");
    const double s = p.shape1 + p.shape2;
    return log_gamma(s) - log_gamma(p.shape1) - log_gamma(p.shape2) +
           (p.shape1 - 1.0) * std::log(x) - s * std::log1p(x);
}

double lomax_log_pdf(double y, const LomaxParams& p) {
    validate(p);
    require_positive(y, "lomax_log_pdf: y");
    return std::log(p.shape / p.scale) - (p.shape + 1.0) * std::log1p(y / p.scale);
}

}  // namespace gssm
