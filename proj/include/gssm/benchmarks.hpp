#pragma once

// Simulation harness: synthetic portfolios, the six benchmark predictors,
// out-of-sample scoring and replication aggregation.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gssm/estimation.hpp"
#include "gssm/rng.hpp"
#include "gssm/ssm.hpp"

namespace gssm {

struct SimulationScheme {
    int instances = 5000;  ///< M
    int periods = 5;       ///< T training periods
    bool holdout = true;   ///< also generate period T + 1
    // v_{i,t} = N + B, N ~ Poisson(poisson_slope (t + 1)),
    // B ~ Bernoulli(clamp(bernoulli_intercept + bernoulli_slope t, 0, 1))
    double poisson_slope = 0.2;
    double bernoulli_intercept = 1.2;
    double bernoulli_slope = -0.2;
    // mu_{i,t} ~ Uniform(mu_low, mu_high), drawn per instance and period
    double mu_low = 2000.0;
    double mu_high = 4000.0;
    ModelParams model{3.0, 1.0, Stationary{0.5}};

    int total_periods() const { return periods + (holdout ? 1 : 0); }
};

void validate(const SimulationScheme& scheme);

/// Bernoulli success probability for period t, clamped to [0, 1].
double bernoulli_probability(const SimulationScheme& scheme, int t);

struct SimulatedDataset {
    std::vector<Trajectory> trajectories;
    std::vector<std::vector<double>> theta;
};

/// Instance i draws from its own stream derive_seed(seed, {i}), so the
/// output is independent of thread count.
SimulatedDataset generate_dataset(const SimulationScheme& scheme, std::uint64_t seed,
                                  unsigned threads = 1);
SimulatedDataset generate_dataset(const SimulationScheme& scheme, Rng& rng, unsigned threads = 1);

enum class BenchmarkModel { HomIndependent, HomBuhlmann, HomSSM, HetIndependent, HetBuhlmann, HetSSM };

inline constexpr std::array<BenchmarkModel, 6> kAllBenchmarkModels{
    BenchmarkModel::HomIndependent, BenchmarkModel::HomBuhlmann, BenchmarkModel::HomSSM,
    BenchmarkModel::HetIndependent, BenchmarkModel::HetBuhlmann, BenchmarkModel::HetSSM};

const char* to_string(BenchmarkModel m);
bool is_homogeneous(BenchmarkModel m);
/// Family fitted by the model; nullopt for the independent models.
std::optional<FitFamily> fitted_family(BenchmarkModel m);

/// Sum Y / sum v over the first `training_periods` periods of every trajectory.
double pooled_mu(std::span<const Trajectory> dataset, int training_periods);

/// Copy of the dataset with every mu replaced by `mu` (periods with v = 0 included).
std::vector<Trajectory> with_constant_mu(std::span<const Trajectory> dataset, double mu);

/// sqrt(mean((mu_hat v - Y)^2)); mu_hat are per-unit predictions.
double rmse(std::span<const double> per_unit_predictions, std::span<const double> actuals,
            std::span<const std::int64_t> exposures);

/// 2 sum(-v log(Y / (mu_hat v)) + (Y - mu_hat v) / mu_hat), with the log term
/// taken as 0 when Y = v = 0.
double gdev(std::span<const double> per_unit_predictions, std::span<const double> actuals,
            std::span<const std::int64_t> exposures);

struct ModelScore {
    BenchmarkModel model;
    double rmse = 0.0;
    double gdev = 0.0;
    std::optional<FitResult> fit;
    std::vector<double> per_unit_predictions;
};

/// Scores `model` on period training_periods + 1 at fixed parameters
/// (nullopt for the independent models, which have none).
ModelScore score_model(BenchmarkModel model, std::span<const Trajectory> dataset,
                       int training_periods, const std::optional<ModelParams>& params);

/// Fits `model` on the first `training_periods` periods and scores period
/// training_periods + 1 (which every trajectory must contain).
ModelScore evaluate_model(BenchmarkModel model, std::span<const Trajectory> dataset,
                          int training_periods, const FitConfig& fit_config);

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  ///< across replications
    std::size_t n = 0;
};

Summary summarize(std::span<const double> xs);

struct ModelAggregate {
    BenchmarkModel model;
    std::vector<double> rmse;
    std::vector<double> gdev;
    std::vector<FitResult> fits;
    Summary rmse_summary, gdev_summary;
    Summary a_init_summary, psi_summary, delta_summary;
};

struct ValidationReport {
    int replications = 0;
    int failed_replications = 0;
    std::vector<std::string> failure_messages;
    std::vector<ModelAggregate> models;

    const ModelAggregate* find(BenchmarkModel m) const;
};

struct ExperimentConfig {
    SimulationScheme scheme;
    int replications = 1;
    std::vector<BenchmarkModel> models{kAllBenchmarkModels.begin(), kAllBenchmarkModels.end()};
    std::uint64_t seed = 1;
    unsigned threads = 1;
    FitConfig fit;
};

/// Replication r uses the dataset stream derive_seed(seed, {r}). A replication
/// in which any model fails is excluded from every aggregate and counted.
ValidationReport run_experiment(const ExperimentConfig& config);

/// Aggregates already computed per-replication scores (one inner vector per replication).
ValidationReport aggregate(const std::vector<std::vector<ModelScore>>& replications,
                           int failed, std::vector<std::string> failure_messages);

/// Model x {RMSE, GDEV} table: Homogeneous / Heterogeneous rows, Independent /
/// Buhlmann / SSM columns, means with standard deviations on the next row.
void write_validation_table(std::ostream& out, const ValidationReport& report);
/// Mean and sd of the estimates for the parametric models.
void write_estimation_table(std::ostream& out, const ValidationReport& report);

}  // namespace gssm
