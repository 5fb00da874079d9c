#pragma once

// Gamma, Beta-prime and Lomax densities and samplers.
//
// Gamma uses the RATE convention throughout: Gamma(shape, rate) has density
//   rate^shape / Gamma(shape) * x^(shape-1) * exp(-rate * x),
// mean shape/rate and variance shape/rate^2. Many libraries (including
// std::gamma_distribution) take a scale = 1/rate instead.

#include "gssm/rng.hpp"

namespace gssm {

struct GammaParams {
    double shape;
    double rate;
};

struct BetaPrimeParams {
    double shape1;
    double shape2;
};

/// Pareto type II: density (shape/scale) * (1 + y/scale)^-(shape+1).
struct LomaxParams {
    double shape;
    double scale;
};

/// Natural log of the Gamma function. Thread-safe (does not touch signgam).
double log_gamma(double x);

void validate(const GammaParams& p);
void validate(const BetaPrimeParams& p);
void validate(const LomaxParams& p);

double gamma_log_pdf(double x, const GammaParams& p);
double gamma_mean(const GammaParams& p);
double gamma_variance(const GammaParams& p);
double gamma_sample(const GammaParams& p, Rng& rng);

double beta_prime_log_pdf(double x, const BetaPrimeParams& p);

double lomax_log_pdf(double y, const LomaxParams& p);

}  // namespace gssm
