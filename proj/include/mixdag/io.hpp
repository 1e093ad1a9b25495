#ifndef MIXDAG_IO_HPP
#define MIXDAG_IO_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixdag/graph.hpp"
#include "mixdag/mixture.hpp"

namespace mixdag {

using nlohmann::json;

// Graph JSON: {"nodes": [labels], "directed": [[u,v],...],
// "bidirected": [[u,v],...], "marks": {"u-v": [m_at_u, m_at_v], ...}}.
// "marks" is present only for PAGs.

inline json to_json(const Dag& g) {
    json j;
    j["nodes"] = g.labels();
    j["directed"] = json::array();
    for (const auto& [u, v] : g.edges()) j["directed"].push_back({u, v});
    return j;
}

inline json to_json(const MixedGraph& g) {
    json j;
    j["nodes"] = g.labels();
    j["directed"] = json::array();
    j["bidirected"] = json::array();
    for (const auto& [u, v] : g.directed_edges()) j["directed"].push_back({u, v});
    for (const auto& [u, v] : g.bidirected_edges()) j["bidirected"].push_back({u, v});
    return j;
}

inline json to_json(const Pag& g) {
    json j;
    j["nodes"] = g.labels();
    j["marks"] = json::object();
    for (const auto& [e, marks] : g.marks()) {
        const std::string key = std::to_string(e.first) + "-" + std::to_string(e.second);
        j["marks"][key] = {mark_name(marks.first), mark_name(marks.second)};
    }
    return j;
}

namespace io_detail {

inline std::vector<std::string> labels_from(const json& j) {
    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw std::invalid_argument("graph json: missing \"nodes\" array");
    return j["nodes"].get<std::vector<std::string>>();
}

inline std::vector<Edge> edges_from(const json& j, const char* field) {
    std::vector<Edge> out;
    if (!j.contains(field)) return out;
    for (const auto& e : j[field]) {
        if (!e.is_array() || e.size() != 2)
            throw std::invalid_argument(std::string("graph json: bad edge in ") + field);
        out.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return out;
}

}  // namespace io_detail

inline Dag dag_from_json(const json& j) {
    auto labels = io_detail::labels_from(j);
    const int n = static_cast<int>(labels.size());
    return Dag(n, io_detail::edges_from(j, "directed"), std::move(labels));
}

inline MixedGraph mixed_graph_from_json(const json& j) {
    auto labels = io_detail::labels_from(j);
    const int n = static_cast<int>(labels.size());
    return MixedGraph(n, io_detail::edges_from(j, "directed"),
                      io_detail::edges_from(j, "bidirected"), std::move(labels));
}

inline Pag pag_from_json(const json& j) {
    auto labels = io_detail::labels_from(j);
    const int n = static_cast<int>(labels.size());
    Pag::MarkMap marks;
    if (j.contains("marks")) {
        for (const auto& [key, val] : j["marks"].items()) {
            const auto dash = key.find('-');
            if (dash == std::string::npos)
                throw std::invalid_argument("graph json: bad marks key " + key);
            const int u = std::stoi(key.substr(0, dash));
            const int v = std::stoi(key.substr(dash + 1));
            if (!val.is_array() || val.size() != 2)
                throw std::invalid_argument("graph json: bad marks value for " + key);
            marks[{u, v}] = {mark_from_name(val[0].get<std::string>()),
                             mark_from_name(val[1].get<std::string>())};
        }
    }
    return Pag(n, std::move(marks), std::move(labels));
}

// Mixture spec JSON: {"components": [graph,...], "v_inv": [...],
// "weights": [...]}.
inline json to_json(const MixtureSpec& spec) {
    json j;
    j["components"] = json::array();
    for (const auto& d : spec.components) j["components"].push_back(to_json(d));
    j["v_inv"] = spec.v_inv;
    j["weights"] = spec.mixing_weights;
    return j;
}

inline MixtureSpec mixture_spec_from_json(const json& j) {
    MixtureSpec spec;
    if (!j.contains("components"))
        throw std::invalid_argument("mixture json: missing \"components\"");
    for (const auto& c : j["components"]) spec.components.push_back(dag_from_json(c));
    if (j.contains("v_inv")) spec.v_inv = make_node_set(j["v_inv"].get<std::vector<int>>());
    if (j.contains("weights")) {
        spec.mixing_weights = j["weights"].get<std::vector<double>>();
    } else {
        spec.mixing_weights.assign(spec.components.size(), 1.0 / spec.components.size());
    }
    spec.validate();
    return spec;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

struct CsvData {
    std::vector<std::string> column_labels;  // excludes the label column
    Eigen::MatrixXd data;
    std::optional<std::vector<int>> labels;  // trailing "label" column if present
};

// Samples CSV: header row of variable labels (optionally a trailing
// "label" column of integer component ids), one sample per row.
inline void write_csv(std::ostream& out, const CsvData& csv,
                      const std::vector<std::string>& metadata_lines = {}) {
    for (const auto& line : metadata_lines) out << "# " << line << "\n";
    for (std::size_t i = 0; i < csv.column_labels.size(); ++i)
        out << (i ? "," : "") << csv.column_labels[i];
    if (csv.labels) out << ",label";
    out << "\n";
    for (int r = 0; r < csv.data.rows(); ++r) {
        for (int c = 0; c < csv.data.cols(); ++c)
            out << (c ? "," : "") << format_double(csv.data(r, c));
        if (csv.labels) out << "," << (*csv.labels)[r];
        out << "\n";
    }
}

inline void write_csv_file(const std::string& path, const CsvData& csv,
                           const std::vector<std::string>& metadata_lines = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_csv(out, csv, metadata_lines);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline CsvData read_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw std::runtime_error("csv: missing header row");
    bool has_label = !header.empty() && header.back() == "label";
    const int p = static_cast<int>(header.size()) - (has_label ? 1 : 0);
    if (p < 1) throw std::runtime_error("csv: no data columns");
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != p + (has_label ? 1 : 0))
            throw std::runtime_error("csv: row with wrong field count");
        std::vector<double> row(p);
        for (int c = 0; c < p; ++c) {
            try {
                row[c] = std::stod(fields[c]);
            } catch (const std::exception&) {
                throw std::runtime_error("csv: non-numeric value \"" + fields[c] + "\"");
            }
        }
        rows.push_back(std::move(row));
        if (has_label) labels.push_back(std::stoi(fields[p]));
    }
    if (rows.empty()) throw std::runtime_error("csv: no data rows");
    CsvData out;
    out.column_labels.assign(header.begin(), header.begin() + p);
    out.data.resize(static_cast<int>(rows.size()), p);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < p; ++c) out.data(static_cast<int>(r), c) = rows[r][c];
    if (has_label) out.labels = std::move(labels);
    return out;
}

inline CsvData read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in);
}

// FNV-1a, used to stamp output files with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace mixdag

#endif  // MIXDAG_IO_HPP
