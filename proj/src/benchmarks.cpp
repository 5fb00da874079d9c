#include "gssm/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "gssm/credibility.hpp"
#include "gssm/errors.hpp"
#include "gssm/parallel.hpp"

namespace gssm {

void validate(const SimulationScheme& scheme) {
    if (scheme.instances < 1) throw DomainError("scheme: instance count M must be >= 1");
    if (scheme.periods < 1) throw DomainError("scheme: training periods T must be >= 1");
    if (!(scheme.poisson_slope >= 0.0)) throw DomainError("scheme: Poisson slope must be >= 0");
    if (!(scheme.mu_low > 0.0) || !(scheme.mu_high >= scheme.mu_low))
        throw DomainError("scheme: severity bounds must satisfy 0 < low <= high");
    validate(scheme.model);
}

double bernoulli_probability(const SimulationScheme& scheme, int t) {
    return std::clamp(scheme.bernoulli_intercept + scheme.bernoulli_slope * t, 0.0, 1.0);
}

SimulatedDataset generate_dataset(const SimulationScheme& scheme, std::uint64_t seed,
                                  unsigned threads) {
    validate(scheme);
    const auto m = static_cast<std::size_t>(scheme.instances);
    const int total = scheme.total_periods();
    SimulatedDataset out;
    out.trajectories.resize(m);
    out.theta.resize(m);
    parallel_for(m, threads, [&](std::size_t i) {
        Rng rng = make_rng(seed, {i});
        std::vector<Exposure> exo;
        exo.reserve(static_cast<std::size_t>(total));
        std::uniform_real_distribution<double> severity(scheme.mu_low, scheme.mu_high);
        for (int t = 1; t <= total; ++t) {
            std::poisson_distribution<std::int64_t> claims(scheme.poisson_slope * (t + 1));
            std::bernoulli_distribution extra(bernoulli_probability(scheme, t));
            const std::int64_t v = claims(rng) + (extra(rng) ? 1 : 0);
            exo.push_back({v, severity(rng)});
        }
        auto sim = simulate_trajectory(scheme.model, exo, rng, std::to_string(i + 1));
        // severities are known for every period, including empty ones
        for (std::size_t k = 0; k < exo.size(); ++k) sim.trajectory.periods[k].mu = exo[k].mu;
        out.trajectories[i] = std::move(sim.trajectory);
        out.theta[i] = std::move(sim.theta);
    });
    return out;
}

SimulatedDataset generate_dataset(const SimulationScheme& scheme, Rng& rng, unsigned threads) {
    return generate_dataset(scheme, static_cast<std::uint64_t>(rng()), threads);
}

const char* to_string(BenchmarkModel m) {
    switch (m) {
        case BenchmarkModel::HomIndependent: return "HomIndependent";
        case BenchmarkModel::HomBuhlmann: return "HomBuhlmann";
        case BenchmarkModel::HomSSM: return "HomSSM";
        case BenchmarkModel::HetIndependent: return "HetIndependent";
        case BenchmarkModel::HetBuhlmann: return "HetBuhlmann";
        case BenchmarkModel::HetSSM: return "HetSSM";
    }
    return "unknown";
}

bool is_homogeneous(BenchmarkModel m) {
    return m == BenchmarkModel::HomIndependent || m == BenchmarkModel::HomBuhlmann ||
           m == BenchmarkModel::HomSSM;
}

std::optional<FitFamily> fitted_family(BenchmarkModel m) {
    switch (m) {
        case BenchmarkModel::HomBuhlmann:
        case BenchmarkModel::HetBuhlmann: return FitFamily::Buhlmann;
        case BenchmarkModel::HomSSM:
        case BenchmarkModel::HetSSM: return FitFamily::Stationary;
        default: return std::nullopt;
    }
}

double pooled_mu(std::span<const Trajectory> dataset, int training_periods) {
    double sum_y = 0.0, sum_v = 0.0;
    for (const auto& traj : dataset) {
        const auto n = std::min<std::size_t>(traj.size(), static_cast<std::size_t>(training_periods));
        for (std::size_t k = 0; k < n; ++k) {
            sum_y += traj.periods[k].y;
            sum_v += static_cast<double>(traj.periods[k].v);
        }
    }
    if (!(sum_v > 0.0)) throw DataError("pooled_mu: total exposure over the training periods is zero");
    return sum_y / sum_v;
}

std::vector<Trajectory> with_constant_mu(std::span<const Trajectory> dataset, double mu) {
    std::vector<Trajectory> out(dataset.begin(), dataset.end());
    for (auto& traj : out)
        for (auto& p : traj.periods) p.mu = mu;
    return out;
}

namespace {

void check_aligned(std::size_t a, std::size_t b, std::size_t c) {
    if (a != b || a != c) throw DomainError("score: predictions, actuals and exposures differ in length");
    if (a == 0) throw DomainError("score: no instances to score");
}

}  // namespace

double rmse(std::span<const double> per_unit_predictions, std::span<const double> actuals,
            std::span<const std::int64_t> exposures) {
    check_aligned(per_unit_predictions.size(), actuals.size(), exposures.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double e = per_unit_predictions[i] * static_cast<double>(exposures[i]) - actuals[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(actuals.size()));
}

double gdev(std::span<const double> per_unit_predictions, std::span<const double> actuals,
            std::span<const std::int64_t> exposures) {
    check_aligned(per_unit_predictions.size(), actuals.size(), exposures.size());
    double total = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double mu = per_unit_predictions[i];
        const double v = static_cast<double>(exposures[i]);
        const double y = actuals[i];
        if (!(mu > 0.0)) throw DomainError("gdev: per-unit predictions must be positive");
        double log_term = 0.0;
        if (exposures[i] > 0) {
            if (!(y > 0.0))
                throw DomainError("gdev: zero response with positive exposure at instance " +
                                  std::to_string(i + 1));
            log_term = -v * std::log(y / (mu * v));
        } else if (y != 0.0) {
            throw DomainError("gdev: positive response with zero exposure at instance " +
                              std::to_string(i + 1));
        }
        total += log_term + (y - mu * v) / mu;
    }
    return 2.0 * total;
}

namespace {

struct Split {
    std::vector<Trajectory> training;
    std::vector<double> actual;
    std::vector<std::int64_t> exposure;
    std::vector<double> mu_next;
};

Split split_holdout(BenchmarkModel model, std::span<const Trajectory> dataset,
                    int training_periods) {
    if (training_periods < 1) throw DomainError("evaluate_model: need at least one training period");
    const auto T = static_cast<std::size_t>(training_periods);
    std::vector<Trajectory> data(dataset.begin(), dataset.end());
    if (is_homogeneous(model)) data = with_constant_mu(dataset, pooled_mu(dataset, training_periods));

    Split out;
    out.training.reserve(data.size());
    for (const auto& traj : data) {
        if (traj.size() <= T)
            throw DataError("evaluate_model: trajectory '" + traj.id + "' has no holdout period");
        out.training.push_back(
            Trajectory{traj.id, {traj.periods.begin(), traj.periods.begin() + static_cast<long>(T)}});
        const Period& h = traj.periods[T];
        if (!h.mu && h.v > 0)
            throw DataError("evaluate_model: trajectory '" + traj.id + "' holdout period lacks mu");
        out.actual.push_back(h.y);
        out.exposure.push_back(h.v);
        // an empty holdout period scores zero whatever its severity
        out.mu_next.push_back(h.mu.value_or(1.0));
    }
    return out;
}

ModelScore score_split(BenchmarkModel model, const Split& split,
                       const std::optional<ModelParams>& params) {
    ModelScore score;
    score.model = model;
    if (params) {
        score.per_unit_predictions.resize(split.training.size());
        for (std::size_t i = 0; i < split.training.size(); ++i) {
            const FilterState last = run_filter(*params, split.training[i]).back();
            score.per_unit_predictions[i] = predict_next_per_unit(*params, last, split.mu_next[i]);
        }
    } else {
        score.per_unit_predictions = split.mu_next;
    }
    score.rmse = rmse(score.per_unit_predictions, split.actual, split.exposure);
    score.gdev = gdev(score.per_unit_predictions, split.actual, split.exposure);
    return score;
}

}  // namespace

ModelScore score_model(BenchmarkModel model, std::span<const Trajectory> dataset,
                       int training_periods, const std::optional<ModelParams>& params) {
    if (fitted_family(model).has_value() != params.has_value())
        throw DomainError(std::string("score_model: ") + to_string(model) +
                          (params ? " takes no parameters" : " needs parameters"));
    return score_split(model, split_holdout(model, dataset, training_periods), params);
}

ModelScore evaluate_model(BenchmarkModel model, std::span<const Trajectory> dataset,
                          int training_periods, const FitConfig& fit_config) {
    const Split split = split_holdout(model, dataset, training_periods);
    const auto family = fitted_family(model);
    if (!family) return score_split(model, split, std::nullopt);
    FitConfig cfg = fit_config;
    cfg.family = *family;
    FitResult f = fit(split.training, cfg);
    if (!f.converged) throw NumericalError(std::string(to_string(model)) + ": fit did not converge");
    ModelScore score = score_split(model, split, to_model_params(f));
    score.fit = std::move(f);
    return score;
}

Summary summarize(std::span<const double> xs) {
    Summary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

const ModelAggregate* ValidationReport::find(BenchmarkModel m) const {
    for (const auto& agg : models)
        if (agg.model == m) return &agg;
    return nullptr;
}

ValidationReport aggregate(const std::vector<std::vector<ModelScore>>& replications, int failed,
                           std::vector<std::string> failure_messages) {
    ValidationReport report;
    report.replications = static_cast<int>(replications.size()) + failed;
    report.failed_replications = failed;
    report.failure_messages = std::move(failure_messages);
    for (const auto& rep : replications) {
        for (const auto& s : rep) {
            auto it = std::find_if(report.models.begin(), report.models.end(),
                                   [&](const ModelAggregate& a) { return a.model == s.model; });
            if (it == report.models.end()) {
                report.models.push_back({});
                it = std::prev(report.models.end());
                it->model = s.model;
            }
            it->rmse.push_back(s.rmse);
            it->gdev.push_back(s.gdev);
            if (s.fit) it->fits.push_back(*s.fit);
        }
    }
    for (auto& agg : report.models) {
        agg.rmse_summary = summarize(agg.rmse);
        agg.gdev_summary = summarize(agg.gdev);
        std::vector<double> a, psi, delta;
        for (const auto& f : agg.fits) {
            a.push_back(f.a_init);
            psi.push_back(f.psi);
            delta.push_back(f.delta);
        }
        agg.a_init_summary = summarize(a);
        agg.psi_summary = summarize(psi);
        agg.delta_summary = summarize(delta);
    }
    return report;
}

ValidationReport run_experiment(const ExperimentConfig& config) {
    if (config.replications < 1) throw DomainError("run_experiment: replications must be >= 1");
    validate(config.scheme);
    SimulationScheme scheme = config.scheme;
    scheme.holdout = true;
    const auto n = static_cast<std::size_t>(config.replications);
    std::vector<std::optional<std::vector<ModelScore>>> results(n);
    std::vector<std::string> errors(n);
    parallel_for(n, config.threads, [&](std::size_t r) {
        try {
            const auto data = generate_dataset(scheme, derive_seed(config.seed, {r}));
            std::vector<ModelScore> scores;
            for (auto model : config.models) {
                FitConfig cfg = config.fit;
                cfg.seed = derive_seed(config.seed, {r, 7, static_cast<std::uint64_t>(model)});
                scores.push_back(evaluate_model(model, data.trajectories, scheme.periods, cfg));
                scores.back().per_unit_predictions.clear();
            }
            results[r] = std::move(scores);
        } catch (const std::exception& e) {
            errors[r] = "replication " + std::to_string(r + 1) + ": " + e.what();
        }
    });
    std::vector<std::vector<ModelScore>> ok;
    std::vector<std::string> messages;
    int failed = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (results[r]) {
            ok.push_back(std::move(*results[r]));
        } else {
            ++failed;
            messages.push_back(errors[r]);
        }
    }
    return aggregate(ok, failed, std::move(messages));
}

namespace {

void write_cell(std::ostream& out, const ValidationReport& report, BenchmarkModel m, bool rmse_col,
                bool sd_row) {
    out << ',';
    if (const auto* agg = report.find(m)) {
        const Summary& s = rmse_col ? agg->rmse_summary : agg->gdev_summary;
        out << (sd_row ? s.sd : s.mean);
    }
}

}  // namespace

void write_validation_table(std::ostream& out, const ValidationReport& report) {
    const auto old = out.precision(10);
    out << "group,stat,rmse_independent,rmse_buhlmann,rmse_ssm,gdev_independent,gdev_buhlmann,gdev_ssm\n";
    struct Row {
        const char* name;
        std::array<BenchmarkModel, 3> models;
    };
    const Row rows[] = {
        {"homogeneous",
         {BenchmarkModel::HomIndependent, BenchmarkModel::HomBuhlmann, BenchmarkModel::HomSSM}},
        {"heterogeneous",
         {BenchmarkModel::HetIndependent, BenchmarkModel::HetBuhlmann, BenchmarkModel::HetSSM}},
    };
    for (const auto& row : rows) {
        for (bool sd_row : {false, true}) {
            out << row.name << ',' << (sd_row ? "sd" : "mean");
            for (bool rmse_col : {true, false})
                for (auto m : row.models) write_cell(out, report, m, rmse_col, sd_row);
            out << '\n';
        }
    }
    out.precision(old);
}

void write_estimation_table(std::ostream& out, const ValidationReport& report) {
    const auto old = out.precision(10);
    out << "model,n,a_init_mean,a_init_sd,psi_mean,psi_sd,delta_mean,delta_sd\n";
    for (const auto& agg : report.models) {
        if (!fitted_family(agg.model)) continue;
        out << to_string(agg.model) << ',' << agg.a_init_summary.n << ',' << agg.a_init_summary.mean
            << ',' << agg.a_init_summary.sd << ',' << agg.psi_summary.mean << ','
            << agg.psi_summary.sd << ',' << agg.delta_summary.mean << ',' << agg.delta_summary.sd
            << '\n';
    }
    out.precision(old);
}

}  // namespace gssm
