// File formats: instance files (JSON header line + CSV matrix payload),
// CSV tables with an embedded JSON header comment, and round-trip-exact
// double formatting.  Indices are 0-based in memory and 1-based in every
// file format.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcm/model.hpp"

namespace hcm {

inline constexpr const char* kToolName = "hcm";
inline constexpr const char* kToolVersion = "0.1.0";
// Placeholder for a release process that stamps the VCS description.
inline constexpr const char* kGitDescribe = "[git-describe]";

// %.17g: enough digits that strtod() reproduces the exact double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::runtime_error("parse_double: '" + s + "'");
    return v;
}

// JSON header embedded as a comment in every output file: tool identity,
// master seed, the full configuration, and the numeric-method knobs that
// are implementation choices (grid sizes, search tolerance).
inline nlohmann::json output_header(std::uint64_t seed, nlohmann::json config) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["git"] = kGitDescribe;
    j["seed"] = seed;
    j["config"] = std::move(config);
    j["numerics"] = {{"psi2_grid_points", 400},
                     {"expfam_grid_points", 400},
                     {"legendre_tolerance", 1e-12}};
    return j;
}

struct CsvTable {
    nlohmann::json header;             // from the "# {...}" comment line
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline void write_csv(std::ostream& os, const nlohmann::json& header,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
    os << "# " << header.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << columns[i] << (i + 1 < columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    if (line.rfind("# ", 0) == 0) {
        t.header = nlohmann::json::parse(line.substr(2));
        if (!std::getline(is, line)) throw std::runtime_error("read_csv: missing column row");
    }
    t.columns = split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("read_csv: cannot open " + path);
    return read_csv(f);
}

// Instance file: one JSON header line, then the full n x n observation
// matrix, one CSV row per line.
inline void save_instance(std::ostream& os, const Instance& inst, const DistPair& pair) {
    nlohmann::json h;
    h["format"] = "hcm-instance";
    h["tool"] = kToolName;
    h["version"] = kToolVersion;
    h["git"] = kGitDescribe;
    h["n"] = inst.n;
    h["K"] = inst.K;
    h["pair"] = pair.to_json();
    h["diag_mode"] = to_string(inst.diag_mode);
    h["seed"] = inst.seed;
    nlohmann::json comm = nlohmann::json::array();
    for (int c : inst.community) comm.push_back(c + 1);
    h["community"] = comm;
    os << h.dump() << "\n";
    for (int i = 0; i < inst.n; ++i) {
        for (int j = 0; j < inst.n; ++j)
            os << format_double(inst.values(i, j)) << (j + 1 < inst.n ? "," : "");
        os << "\n";
    }
}

inline void save_instance_file(const std::string& path, const Instance& inst,
                               const DistPair& pair) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_instance: cannot open " + path);
    save_instance(f, inst, pair);
}

struct LoadedInstance {
    Instance instance;
    DistPair pair;
};

inline LoadedInstance load_instance(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("load_instance: empty file");
    const nlohmann::json h = nlohmann::json::parse(line);
    if (h.value("format", "") != std::string("hcm-instance"))
        throw std::runtime_error("load_instance: not an instance file");
    Instance inst;
    inst.n = h.at("n").get<int>();
    inst.K = h.at("K").get<int>();
    inst.diag_mode = diag_mode_from_string(h.at("diag_mode").get<std::string>());
    inst.seed = h.at("seed").get<std::uint64_t>();
    for (const auto& c : h.at("community")) inst.community.push_back(c.get<int>() - 1);
    std::sort(inst.community.begin(), inst.community.end());
    inst.values = SymMatrix(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        if (!std::getline(is, line))
            throw std::runtime_error("load_instance: truncated matrix payload");
        const auto cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != inst.n)
            throw std::runtime_error("load_instance: bad row width");
        for (int j = 0; j <= i; ++j) {
            const double v = parse_double(cells[j]);
            if (j < i && v != inst.values(j, i))
                throw std::runtime_error("load_instance: matrix payload is not symmetric");
            inst.values.set(i, j, v);
        }
        for (int j = i + 1; j < inst.n; ++j) inst.values.set(i, j, parse_double(cells[j]));
    }
    return LoadedInstance{std::move(inst), DistPair::from_json(h.at("pair"))};
}

inline LoadedInstance load_instance_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_instance: cannot open " + path);
    return load_instance(f);
}

// Bernoulli instances can also be exported as a 1-based edge list.
inline void save_edge_list(std::ostream& os, const Instance& inst, const DistPair& pair) {
    if (pair.kind() != DistKind::Bernoulli)
        throw std::invalid_argument("save_edge_list: only Bernoulli instances have edges");
    nlohmann::json h;
    h["format"] = "hcm-edges";
    h["tool"] = kToolName;
    h["version"] = kToolVersion;
    h["git"] = kGitDescribe;
    h["n"] = inst.n;
    h["K"] = inst.K;
    h["pair"] = pair.to_json();
    h["seed"] = inst.seed;
    os << h.dump() << "\n";
    for (int i = 0; i < inst.n; ++i)
        for (int j = i + 1; j < inst.n; ++j)
            if (inst.values(i, j) == 1.0) os << (i + 1) << "," << (j + 1) << "\n";
}

}  // namespace hcm
