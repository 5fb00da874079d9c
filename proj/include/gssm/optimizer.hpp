#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gssm/rng.hpp"

namespace gssm {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    /// Converged when 2|f_worst - f_best| <= tolerance (|f_worst| + |f_best| + tiny).
    double tolerance = 1e-8;
    int max_iterations = 2000;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimises f by the downhill simplex method (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options);

/// Runs nelder_mead, then `restarts` more times from the incumbent with a
/// randomly jittered initial simplex; returns the best point found.
/// Iteration and evaluation counts accumulate over all runs; converged
/// reports whether the run that produced the optimum converged.
NelderMeadResult minimize_with_restarts(const Objective& f, std::vector<double> start,
                                        const NelderMeadOptions& options, int restarts, Rng& rng);

}  // namespace gssm
