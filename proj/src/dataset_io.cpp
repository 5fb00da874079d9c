#include "gssm/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "gssm/errors.hpp"

namespace gssm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

std::optional<double> to_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

std::optional<std::int64_t> to_int(const std::string& s) {
    std::int64_t v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

}  // namespace

std::vector<Trajectory> parse_dataset(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(source_name + ": empty file, header expected");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* required : {"id", "period", "y", "v", "mu"})
        if (!col.count(required))
            throw DataError(source_name + ":1: header lacks required column '" + required + "'");
    const bool has_label = col.count("label") > 0;

    struct Row {
        int lineno;
        std::int64_t period;
        Period data;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Row>> groups;
    std::map<std::pair<std::string, std::int64_t>, int> seen;
    std::vector<std::string> errors;
    auto error = [&](int lineno, const std::string& msg) {
        errors.push_back(source_name + ":" + std::to_string(lineno) + ": " + msg);
    };

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            error(lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(f.size()));
            continue;
        }
        const std::string& id = f[col["id"]];
        if (id.empty()) error(lineno, "empty id");
        const auto period = to_int(f[col["period"]]);
        const auto y = to_double(f[col["y"]]);
        const auto v = to_int(f[col["v"]]);
        const std::string& mu_field = f[col["mu"]];
        bool ok = true;
        if (!period || *period < 1) ok = false, error(lineno, "period must be a positive integer");
        if (!y || !(*y >= 0.0) || !std::isfinite(*y))
            ok = false, error(lineno, "y must be a nonnegative number");
        if (!v || *v < 0) ok = false, error(lineno, "v must be a nonnegative integer");
        std::optional<double> mu;
        if (!mu_field.empty()) {
            mu = to_double(mu_field);
            if (!mu || !(*mu > 0.0) || !std::isfinite(*mu))
                ok = false, error(lineno, "mu must be a positive number or empty");
        }
        if (!ok) continue;
        if (*v == 0 && *y != 0.0) error(lineno, "positive y with zero exposure v");
        if (*v > 0 && *y == 0.0) error(lineno, "zero y with positive exposure v");
        if (*v > 0 && !mu) error(lineno, "missing mu with positive exposure v");
        if (*v == 0 && mu) error(lineno, "mu must be empty when v = 0");
        const auto key = std::pair{id, *period};
        if (auto it = seen.find(key); it != seen.end()) {
            error(lineno, "duplicate (id, period) = (" + id + ", " + std::to_string(*period) +
                              "), first seen on line " + std::to_string(it->second));
            continue;
        }
        seen[key] = lineno;
        if (!groups.count(id)) order.push_back(id);
        Period p;
        p.v = *v;
        p.y = *y;
        p.mu = mu;
        if (has_label) p.label = f[col["label"]];
        groups[id].push_back({lineno, *period, std::move(p)});
    }

    std::vector<Trajectory> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        auto& rows = groups[id];
        std::sort(rows.begin(), rows.end(),
                  [](const Row& a, const Row& b) { return a.period < b.period; });
        Trajectory traj;
        traj.id = id;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].period != static_cast<std::int64_t>(k + 1)) {
                error(rows[k].lineno, "periods for id '" + id +
                                          "' must be contiguous from 1; expected period " +
                                          std::to_string(k + 1) + ", found " +
                                          std::to_string(rows[k].period));
                break;
            }
            traj.periods.push_back(std::move(rows[k].data));
        }
        out.push_back(std::move(traj));
    }
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) msg += e + "\n";
        msg.pop_back();
        throw DataError(msg);
    }
    return out;
}

std::vector<Trajectory> parse_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file for reading");
    return parse_dataset(in, path);
}

void write_dataset(std::ostream& out, const std::vector<Trajectory>& dataset) {
    bool labels = false;
    for (const auto& traj : dataset)
        for (const auto& p : traj.periods) labels = labels || !p.label.empty();
    const auto old = out.precision(12);
    out << "id,period,y,v,mu" << (labels ? ",label" : "") << '\n';
    for (const auto& traj : dataset) {
        for (std::size_t k = 0; k < traj.periods.size(); ++k) {
            const Period& p = traj.periods[k];
            out << traj.id << ',' << (k + 1) << ',' << p.y << ',' << p.v << ',';
            if (p.v > 0 && p.mu) out << *p.mu;
            if (labels) out << ',' << p.label;
            out << '\n';
        }
    }
    out.precision(old);
}

void write_dataset(const std::string& path, const std::vector<Trajectory>& dataset) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    write_dataset(out, dataset);
    if (!out) throw DataError(path + ": write failed");
}

void write_latent_paths(std::ostream& out, const std::vector<Trajectory>& dataset,
                        const std::vector<std::vector<double>>& theta) {
    if (theta.size() != dataset.size())
        throw DomainError("write_latent_paths: theta paths do not match the dataset");
    const auto old = out.precision(12);
    out << "id,period,theta\n";
    for (std::size_t i = 0; i < dataset.size(); ++i)
        for (std::size_t k = 0; k < theta[i].size(); ++k)
            out << dataset[i].id << ',' << (k + 1) << ',' << theta[i][k] << '\n';
    out.precision(old);
}

}  // namespace gssm
