#pragma once

// The simulate / fit / forecast / validate workflows behind the gssm tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace gssm::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNumericalFailure = 2 };

struct RunConfig {
    std::string input;
    std::string output;         ///< empty: write to the log stream
    std::string latent_output;  ///< simulate: optional theta sidecar
    std::string params;         ///< forecast: fit report to read
    std::string next;           ///< forecast: optional id,v,mu file for period t+1
    std::string summary;        ///< validate: JSON summary path (default <output>.json)
    std::uint64_t seed = 1;
    std::string regime = "ssm";               ///< ssm | buhlmann | independent
    std::string mu_mode = "heterogeneous";    ///< heterogeneous | homogeneous
    int replications = 1;
    unsigned threads = 1;

    // simulation scheme
    int instances = 1000;
    int periods = 5;
    bool holdout = true;
    double a_init = 3.0;
    double psi = 1.0;
    double delta = 0.5;

    // optimizer
    double tolerance = 1e-8;
    int max_iterations = 2000;
    int restarts = 3;
    int bootstrap = 0;

    // forecast defaults when no --next file is given
    std::int64_t v_next = 1;
    std::optional<double> mu_next;
};

/// Throws DataError naming the offending parameter.
void validate(const RunConfig& config, const std::string& command);

int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_forecast(const RunConfig& config, std::ostream& log);
int cmd_validate(const RunConfig& config, std::ostream& log);

/// Parses argv (flags override values from --config) and dispatches.
int run(int argc, char** argv);

}  // namespace gssm::cli
