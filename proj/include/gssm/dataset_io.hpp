#pragma once

// CSV dataset files: header row naming at least id, period, y, v, mu
// (any order; an optional `label` column is carried through). mu is empty
// exactly when v = 0. Floats are written with 12 significant digits.

#include <iosfwd>
#include <string>
#include <vector>

#include "gssm/ssm.hpp"

namespace gssm {

std::vector<Trajectory> parse_dataset(std::istream& in, const std::string& source_name);
std::vector<Trajectory> parse_dataset(const std::string& path);

void write_dataset(std::ostream& out, const std::vector<Trajectory>& dataset);
void write_dataset(const std::string& path, const std::vector<Trajectory>& dataset);

/// Latent sidecar: id,period,theta.
void write_latent_paths(std::ostream& out, const std::vector<Trajectory>& dataset,
                        const std::vector<std::vector<double>>& theta);

}  // namespace gssm
