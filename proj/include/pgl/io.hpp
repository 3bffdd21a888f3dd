#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgl/errors.hpp"
#include "pgl/gbs.hpp"
#include "pgl/graph.hpp"
#include "pgl/weights.hpp"

namespace pgl::io {

using nlohmann::json;

// Graph document: {n, p, k, a0, b0, edges} with edges sorted
// lexicographically. Round-trips bit-exactly (p uses shortest-round-trip
// formatting).
inline json graph_to_json(const BipartiteGraph& g, const std::vector<std::uint32_t>& a0 = {},
                          const std::vector<std::uint32_t>& b0 = {}) {
    json doc;
    doc["n"] = g.n();
    doc["p"] = g.p();
    doc["k"] = a0.size();
    doc["a0"] = a0;
    doc["b0"] = b0;
    json edges = json::array();
    for (auto [u, v] : g.edges_sorted()) edges.push_back({u, v});
    doc["edges"] = std::move(edges);
    return doc;
}

inline json instance_to_json(const PlantedInstance& inst) {
    return graph_to_json(inst.graph, inst.a0, inst.b0);
}

inline PlantedInstance instance_from_json(const json& doc) {
    require(doc.is_object(), "graph document: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        require(key == "n" || key == "p" || key == "k" || key == "a0" || key == "b0" ||
                    key == "edges",
                "graph document: unknown key '" + key + "'");
    }
    require(doc.contains("n") && doc.contains("p") && doc.contains("edges"),
            "graph document: required keys n, p, edges");
    auto n = doc.at("n").get<std::uint32_t>();
    auto p = doc.at("p").get<double>();
    require(n >= 1, "graph document: n must be >= 1");
    require(p >= 0.0 && p <= 1.0, "graph document: p must be in [0, 1]");
    BitMatrix adj(n, n);
    for (const auto& e : doc.at("edges")) {
        require(e.is_array() && e.size() == 2, "graph document: edges must be [u, v] pairs");
        auto u = e[0].get<std::uint32_t>();
        auto v = e[1].get<std::uint32_t>();
        require(u < n && v < n, "graph document: edge index out of range");
        adj.set(u, v);
    }
    BipartiteGraph g(n, p, std::move(adj));
    std::vector<std::uint32_t> a0, b0;
    if (doc.contains("a0")) a0 = doc.at("a0").get<std::vector<std::uint32_t>>();
    if (doc.contains("b0")) b0 = doc.at("b0").get<std::vector<std::uint32_t>>();
    require(a0.size() == b0.size(), "graph document: |a0| != |b0|");
    if (doc.contains("k"))
        require(doc.at("k").get<std::size_t>() == a0.size(),
                "graph document: k does not match |a0|");
    for (std::uint32_t u : a0)
        for (std::uint32_t v : b0)
            require(g.edge(u, v), "graph document: planted pair (a0, b0) has a missing edge");
    PlantedInstance inst{std::move(g), std::move(a0), std::move(b0),
                         static_cast<std::uint32_t>(doc.value("k", a0.size()))};
    std::sort(inst.a0.begin(), inst.a0.end());
    std::sort(inst.b0.begin(), inst.b0.end());
    return inst;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// `trial,a_indices,b_indices` with semicolon-joined sorted indices.
inline std::string sample_batch_csv(const gbs::SampleBatch& batch) {
    std::ostringstream out;
    out << "trial,a_indices,b_indices\n";
    for (std::size_t t = 0; t < batch.samples.size(); ++t) {
        const auto& s = batch.samples[t];
        out << t << ',';
        for (std::size_t q = 0; q < s.a.size(); ++q) out << (q ? ";" : "") << s.a[q];
        out << ',';
        for (std::size_t q = 0; q < s.b.size(); ++q) out << (q ? ";" : "") << s.b[q];
        out << '\n';
    }
    return out.str();
}

// `node,side,value,stderr,method,samples`.
inline std::string weight_table_csv(const weights::WeightTable& table) {
    std::ostringstream out;
    out << "node,side,value,stderr,method,samples\n";
    const char* side = table.side == Side::left ? "left" : "right";
    for (std::size_t q = 0; q < table.nodes.size(); ++q) {
        out << table.nodes[q] << ',' << side << ',' << format_double(table.values[q]) << ','
            << format_double(table.stderrs[q]) << ',' << weights::method_name(table.method)
            << ',' << table.samples_used << '\n';
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pgl::io
