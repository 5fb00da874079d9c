#include "gssm/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "gssm/benchmarks.hpp"
#include "gssm/credibility.hpp"
#include "gssm/dataset_io.hpp"
#include "gssm/errors.hpp"
#include "gssm/estimation.hpp"

namespace gssm::cli {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    return out;
}

template <class Writer>
void emit(const std::string& path, std::ostream& log, Writer&& write) {
    if (path.empty()) {
        write(log);
        return;
    }
    auto out = open_output(path);
    write(out);
    if (!out) throw DataError(path + ": write failed");
}

bool homogeneous(const RunConfig& c) { return c.mu_mode == "homogeneous"; }

std::vector<Trajectory> load_dataset(const RunConfig& config) {
    auto data = parse_dataset(config.input);
    if (data.empty()) throw DataError(config.input + ": dataset contains no rows");
    return data;
}

double dataset_pooled_mu(const std::vector<Trajectory>& data, const std::string& source) {
    std::size_t longest = 0;
    for (const auto& t : data) longest = std::max(longest, t.size());
    try {
        return pooled_mu(data, static_cast<int>(longest));
    } catch (const DataError&) {
        throw DataError(source + ": cannot pool mu, total exposure is zero");
    }
}

struct NextPeriod {
    std::int64_t v;
    double mu;
};

std::map<std::string, NextPeriod> read_next_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file for reading");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, header expected");
    std::map<std::string, std::size_t> col;
    {
        std::stringstream ss(line);
        std::string name;
        for (std::size_t i = 0; std::getline(ss, name, ','); ++i) {
            if (!name.empty() && name.back() == '\r') name.pop_back();
            col[name] = i;
        }
    }
    for (const char* required : {"id", "v", "mu"})
        if (!col.count(required))
            throw DataError(path + ":1: header lacks required column '" + required + "'");
    std::map<std::string, NextPeriod> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() < col.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": too few fields");
        try {
            const auto v = std::stoll(f[col["v"]]);
            const double mu = std::stod(f[col["mu"]]);
            if (v < 0 || !(mu > 0.0)) throw std::invalid_argument("range");
            if (!out.emplace(f[col["id"]], NextPeriod{v, mu}).second)
                throw DataError(path + ":" + std::to_string(lineno) + ": duplicate id '" +
                                f[col["id"]] + "'");
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": v must be a nonnegative integer and mu a positive number");
        }
    }
    return out;
}

FitConfig fit_config_from(const RunConfig& c) {
    FitConfig f;
    f.family = c.regime == "buhlmann" ? FitFamily::Buhlmann : FitFamily::Stationary;
    f.tolerance = c.tolerance;
    f.max_iterations = c.max_iterations;
    f.restarts = c.restarts;
    f.seed = c.seed;
    return f;
}

nlohmann::json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}};
}

nlohmann::json report_json(const ValidationReport& report, const RunConfig& c) {
    nlohmann::json j;
    j["replications"] = report.replications;
    j["failed_replications"] = report.failed_replications;
    j["failures"] = report.failure_messages;
    j["seed"] = c.seed;
    for (const auto& agg : report.models) {
        nlohmann::json m;
        m["rmse"] = summary_json(agg.rmse_summary);
        m["gdev"] = summary_json(agg.gdev_summary);
        m["rmse_per_replication"] = agg.rmse;
        m["gdev_per_replication"] = agg.gdev;
        if (fitted_family(agg.model)) {
            m["a_init"] = summary_json(agg.a_init_summary);
            m["psi"] = summary_json(agg.psi_summary);
            m["delta"] = summary_json(agg.delta_summary);
        }
        j["models"][to_string(agg.model)] = std::move(m);
    }
    return j;
}

}  // namespace

void validate(const RunConfig& c, const std::string& command) {
    static const std::set<std::string> regimes{"ssm", "buhlmann", "independent"};
    static const std::set<std::string> modes{"heterogeneous", "homogeneous"};
    auto fail = [](const std::string& msg) { throw DataError(msg); };
    if (!regimes.count(c.regime)) fail("--regime must be one of ssm, buhlmann, independent");
    if (!modes.count(c.mu_mode)) fail("--mu-mode must be heterogeneous or homogeneous");
    if (c.replications < 1) fail("--replications must be >= 1");
    if (c.instances < 1) fail("--instances must be >= 1");
    if (c.periods < 1) fail("--periods must be >= 1");
    if (!(c.a_init > 0.0)) fail("--a-init must be positive");
    if (!(c.psi > 0.0)) fail("--psi must be positive");
    if (!(c.delta > 0.0 && c.delta <= 1.0)) fail("--delta must lie in (0, 1]");
    if (!(c.tolerance > 0.0)) fail("--tolerance must be positive");
    if (c.max_iterations < 1) fail("--max-iterations must be >= 1");
    if (c.restarts < 0) fail("--restarts must be >= 0");
    if (c.bootstrap < 0) fail("--bootstrap must be >= 0");
    if (c.v_next < 0) fail("--v-next must be >= 0");
    if (c.mu_next && !(*c.mu_next > 0.0)) fail("--mu-next must be positive");
    if ((command == "fit" || command == "forecast") && c.input.empty())
        fail(command + ": --input is required");
    if (command == "fit" && c.regime == "independent")
        fail("fit: the independent model has no parameters to estimate");
    if (command == "forecast" && c.params.empty() && c.regime != "independent")
        fail("forecast: --params is required (a report written by `fit`)");
}

int cmd_simulate(const RunConfig& c, std::ostream& log) {
    validate(c, "simulate");
    SimulationScheme scheme;
    scheme.instances = c.instances;
    scheme.periods = c.periods;
    scheme.holdout = c.holdout;
    scheme.model = stationary_params(c.a_init, c.psi, c.delta);
    const auto data = generate_dataset(scheme, c.seed, c.threads);
    emit(c.output, log, [&](std::ostream& out) { write_dataset(out, data.trajectories); });
    if (!c.latent_output.empty())
        emit(c.latent_output, log,
             [&](std::ostream& out) { write_latent_paths(out, data.trajectories, data.theta); });
    return kSuccess;
}

int cmd_fit(const RunConfig& c, std::ostream& log) {
    validate(c, "fit");
    auto data = load_dataset(c);
    if (homogeneous(c)) data = with_constant_mu(data, dataset_pooled_mu(data, c.input));
    const FitConfig cfg = fit_config_from(c);
    FitResult result = fit(data, cfg);
    if (c.bootstrap > 0 && result.converged) {
        Rng rng = make_rng(c.seed, {0xb005});
        result.bootstrap_se = bootstrap_se(data, cfg, result, c.bootstrap, rng, c.threads);
    }
    emit(c.output, log, [&](std::ostream& out) { write_fit_report(out, result); });
    if (!result.converged) {
        std::cerr << "fit: optimizer did not converge after " << result.iterations
                  << " iterations\n";
        return kNumericalFailure;
    }
    return kSuccess;
}

int cmd_forecast(const RunConfig& c, std::ostream& log) {
    validate(c, "forecast");
    auto data = load_dataset(c);
    std::optional<double> pooled;
    if (homogeneous(c)) {
        pooled = dataset_pooled_mu(data, c.input);
        data = with_constant_mu(data, *pooled);
    }
    const bool independent = c.regime == "independent";
    ModelParams params{1.0, 1.0, Static{}};
    if (!independent) {
        std::ifstream in(c.params);
        if (!in) throw DataError(c.params + ": cannot open parameter file");
        params = to_model_params(read_fit_report(in, c.params));
    }
    std::map<std::string, NextPeriod> next;
    if (!c.next.empty()) next = read_next_file(c.next);

    std::vector<ForecastRow> rows;
    rows.reserve(data.size());
    for (const auto& traj : data) {
        NextPeriod np{c.v_next, 0.0};
        if (auto it = next.find(traj.id); it != next.end()) {
            np = it->second;
        } else if (!c.next.empty()) {
            throw DataError(c.next + ": no next-period row for id '" + traj.id + "'");
        } else if (pooled) {
            np.mu = *pooled;
        } else if (c.mu_next) {
            np.mu = *c.mu_next;
        } else {
            for (const auto& p : traj.periods)
                if (p.v > 0 && p.mu) np.mu = *p.mu;
            if (!(np.mu > 0.0)) np.mu = dataset_pooled_mu(data, c.input);
        }
        if (pooled) np.mu = *pooled;
        if (independent) {
            ForecastRow row;
            row.id = traj.id;
            row.period = static_cast<int>(traj.size()) + 1;
            row.v_next = np.v;
            row.mu_next = np.mu;
            row.prediction = static_cast<double>(np.v) * np.mu;
            rows.push_back(row);
        } else {
            rows.push_back(forecast_trajectory(params, traj, np.v, np.mu));
        }
    }
    emit(c.output, log, [&](std::ostream& out) { write_forecast_table(out, rows); });
    return kSuccess;
}

int cmd_validate(const RunConfig& c, std::ostream& log) {
    validate(c, "validate");
    FitConfig cfg = fit_config_from(c);
    ValidationReport report;
    if (!c.input.empty()) {
        const auto data = load_dataset(c);
        const std::size_t length = data.front().size();
        for (const auto& t : data)
            if (t.size() != length)
                throw DataError(c.input + ": every id needs the same number of periods (T + 1)");
        if (length < 2) throw DataError(c.input + ": need at least two periods (training + holdout)");
        std::vector<ModelScore> scores;
        std::vector<std::string> failures;
        try {
            for (auto m : kAllBenchmarkModels)
                scores.push_back(evaluate_model(m, data, static_cast<int>(length) - 1, cfg));
        } catch (const NumericalError& e) {
            failures.push_back(e.what());
        }
        report = failures.empty() ? aggregate({scores}, 0, {}) : aggregate({}, 1, failures);
    } else {
        ExperimentConfig exp;
        exp.scheme.instances = c.instances;
        exp.scheme.periods = c.periods;
        exp.scheme.model = stationary_params(c.a_init, c.psi, c.delta);
        exp.replications = c.replications;
        exp.seed = c.seed;
        exp.threads = c.threads;
        exp.fit = cfg;
        report = run_experiment(exp);
    }
    emit(c.output, log, [&](std::ostream& out) { write_validation_table(out, report); });
    const std::string summary = !c.summary.empty() ? c.summary
                                : !c.output.empty() ? c.output + ".json"
                                                    : std::string{};
    if (!summary.empty()) {
        auto out = open_output(summary);
        out << report_json(report, c).dump(2) << '\n';
    }
    if (!c.output.empty()) write_estimation_table(log, report);
    if (report.failed_replications == report.replications) {
        std::cerr << "validate: every replication failed\n";
        for (const auto& m : report.failure_messages) std::cerr << "  " << m << '\n';
        return kNumericalFailure;
    }
    return kSuccess;
}

int run(int argc, char** argv) {
    CLI::App app{"Gamma-Gamma observation-driven state-space models: simulate, fit, forecast, validate"};
    app.set_config("--config", "", "INI/TOML file with option values; command-line flags win");
    app.require_subcommand(1);
    RunConfig c;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--input", c.input, "Dataset CSV (id,period,y,v,mu[,label])");
        sub->add_option("--output", c.output, "Output file (default: stdout)");
        sub->add_option("--seed", c.seed, "Master random seed");
        sub->add_option("--regime", c.regime, "ssm | buhlmann | independent")
            ->check(CLI::IsMember({"ssm", "buhlmann", "independent"}));
        sub->add_option("--mu-mode", c.mu_mode, "heterogeneous | homogeneous")
            ->check(CLI::IsMember({"heterogeneous", "homogeneous"}));
        sub->add_option("--replications", c.replications, "Simulation replications");
        sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    };
    auto scheme = [&](CLI::App* sub) {
        sub->add_option("--instances", c.instances, "Number of instances M");
        sub->add_option("--periods", c.periods, "Training periods T");
        sub->add_option("--a-init", c.a_init, "a_{1|0} of the generating model");
        sub->add_option("--psi", c.psi, "Dispersion of the generating model");
        sub->add_option("--delta", c.delta, "Credibility weight Delta of the generating model");
    };
    auto optimizer = [&](CLI::App* sub) {
        sub->add_option("--tolerance", c.tolerance, "Relative function-value tolerance");
        sub->add_option("--max-iterations", c.max_iterations, "Simplex iterations per run");
        sub->add_option("--restarts", c.restarts, "Jittered simplex restarts");
    };

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
    common(sim);
    scheme(sim);
    sim->add_option("--latent", c.latent_output, "Also write theta paths here");
    bool no_holdout = false;
    sim->add_flag("--no-holdout", no_holdout, "Generate T periods only (no period T+1)");

    auto* fitc = app.add_subcommand("fit", "Maximum-likelihood fit; writes a key=value report");
    common(fitc);
    optimizer(fitc);
    fitc->add_option("--bootstrap", c.bootstrap, "Parametric bootstrap replicates for standard errors");

    auto* fc = app.add_subcommand("forecast", "Next-period predictions with credibility weights");
    common(fc);
    fc->add_option("--params", c.params, "Fit report produced by `fit`");
    fc->add_option("--next", c.next, "CSV with id,v,mu for the forecast period");
    fc->add_option("--v-next", c.v_next, "Exposure for the forecast period when --next is absent");
    fc->add_option("--mu-next", c.mu_next, "Severity for the forecast period when --next is absent");

    auto* val = app.add_subcommand("validate", "Six-model out-of-sample comparison");
    common(val);
    scheme(val);
    optimizer(val);
    val->add_option("--summary", c.summary, "JSON summary path (default: <output>.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kSuccess : kUsageError;
    }
    c.holdout = !no_holdout;

    try {
        if (sim->parsed()) return cmd_simulate(c, std::cout);
        if (fitc->parsed()) return cmd_fit(c, std::cout);
        if (fc->parsed()) return cmd_forecast(c, std::cout);
        if (val->parsed()) return cmd_validate(c, std::cout);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace gssm::cli
