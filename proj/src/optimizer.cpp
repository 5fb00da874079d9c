#include "gssm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace gssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

NelderMeadResult run_simplex(const Objective& f, std::vector<std::vector<double>> simplex,
                             const NelderMeadOptions& options) {
    const std::size_t n = simplex.front().size();
    std::vector<double> fx(n + 1);
    NelderMeadResult res;
    for (std::size_t j = 0; j <= n; ++j) fx[j] = safe_eval(f, simplex[j]);
    res.evaluations = static_cast<int>(n + 1);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point = [&](double scale, const std::vector<double>& worst, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + scale * (worst[i] - centroid[i]);
    };

    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return fx[a] < fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        const double spread = 2.0 * std::abs(fx[worst] - fx[best]);
        const double scale = std::abs(fx[worst]) + std::abs(fx[best]) + 1e-20;
        if (std::isfinite(fx[worst]) && spread <= options.tolerance * scale) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t j = 0; j <= n; ++j) {
            if (j == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i] / static_cast<double>(n);
        }

        point(-1.0, simplex[worst], trial);
        const double fr = safe_eval(f, trial);
        ++res.evaluations;
        if (fr < fx[best]) {
            point(-2.0, simplex[worst], trial2);
            const double fe = safe_eval(f, trial2);
            ++res.evaluations;
            if (fe < fr) {
                simplex[worst] = trial2;
                fx[worst] = fe;
            } else {
                simplex[worst] = trial;
                fx[worst] = fr;
            }
            continue;
        }
        if (fr < fx[second]) {
            simplex[worst] = trial;
            fx[worst] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst, inside otherwise
        const bool outside = fr < fx[worst];
        point(outside ? -0.5 : 0.5, simplex[worst], trial2);
        const double fc = safe_eval(f, trial2);
        ++res.evaluations;
        if (fc < (outside ? fr : fx[worst])) {
            simplex[worst] = trial2;
            fx[worst] = fc;
            continue;
        }
        for (std::size_t j = 0; j <= n; ++j) {
            if (j == best) continue;
            for (std::size_t i = 0; i < n; ++i)
                simplex[j][i] = simplex[best][i] + 0.5 * (simplex[j][i] - simplex[best][i]);
            fx[j] = safe_eval(f, simplex[j]);
            ++res.evaluations;
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    res.x = simplex[best];
    res.value = fx[best];
    return res;
}

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
    return run_simplex(f, std::move(simplex), options);
}

NelderMeadResult minimize_with_restarts(const Objective& f, std::vector<double> start,
                                        const NelderMeadOptions& options, int restarts, Rng& rng) {
    NelderMeadResult best = nelder_mead(f, std::move(start), options);
    int iterations = best.iterations, evaluations = best.evaluations;
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    const std::size_t n = best.x.size();
    for (int r = 0; r < restarts; ++r) {
        std::vector<std::vector<double>> simplex(n + 1, best.x);
        for (std::size_t i = 0; i < n; ++i) {
            const double step = options.initial_step * jitter(rng) * (sign(rng) ? 1.0 : -1.0);
            simplex[i + 1][i] += step;
        }
        NelderMeadResult run = run_simplex(f, std::move(simplex), options);
        iterations += run.iterations;
        evaluations += run.evaluations;
        if (run.value <= best.value) best = std::move(run);
    }
    best.iterations = iterations;
    best.evaluations = evaluations;
    return best;
}

}  // namespace gssm
