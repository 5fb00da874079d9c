#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "gssm/rng.hpp"
#include "gssm/ssm.hpp"

namespace gssm {

/// Parametric families that can be fitted. Buhlmann is the static random
/// effect (Delta fixed at 1); Stationary frees Delta in (0, 1].
enum class FitFamily { Buhlmann, Stationary };

const char* to_string(FitFamily family);

struct FitConfig {
    FitFamily family = FitFamily::Stationary;
    double tolerance = 1e-8;
    int max_iterations = 2000;
    int restarts = 3;
    std::uint64_t seed = 1;
};

struct BootstrapSE {
    double a_init = 0.0;
    double psi = 0.0;
    double delta = 0.0;
    int replicates = 0;
    int failures = 0;
    bool reliable = false;
};

struct FitResult {
    FitFamily family = FitFamily::Stationary;
    double a_init = 0.0;
    double psi = 0.0;
    double delta = 1.0;
    double loglik = 0.0;
    bool converged = false;
    bool at_boundary = false;  ///< Delta = 1 won over the interior optimum
    int iterations = 0;
    int evaluations = 0;
    std::int64_t n_trajectories = 0;
    std::int64_t n_effective_periods = 0;
    std::optional<BootstrapSE> bootstrap_se;
};

/// Model parameters implied by a fit: Static for the Buhlmann family,
/// Stationary(delta) otherwise.
ModelParams to_model_params(const FitResult& fit);
ModelParams stationary_params(double a_init, double psi, double delta);

struct StartingPoint {
    double a_init;
    double psi;
    double delta;
};

/// Rough moment-based starting values: psi from the squared coefficient of
/// variation of normalised per-visit severities Y/(v mu), a_init from the
/// first-period variance of the same quantity, Delta = 0.5.
StartingPoint initial_guess(std::span<const Trajectory> dataset);

/// Maximum likelihood over (log a_init, log psi, logit Delta) by restarted
/// Nelder-Mead. For the Stationary family the Delta = 1 boundary is fitted
/// separately and kept when its likelihood is at least as high.
FitResult fit(std::span<const Trajectory> dataset, const FitConfig& config);

/// Parametric bootstrap: B datasets simulated at the fitted parameters with
/// the observed exposures and severities, refitted. Returns nullopt for B == 0.
std::optional<BootstrapSE> bootstrap_se(std::span<const Trajectory> dataset,
                                        const FitConfig& config, const FitResult& fitted, int B,
                                        Rng& rng, unsigned threads = 1);

/// key=value report, one entry per line.
void write_fit_report(std::ostream& out, const FitResult& fit);
FitResult read_fit_report(std::istream& in, const std::string& source_name);

}  // namespace gssm
