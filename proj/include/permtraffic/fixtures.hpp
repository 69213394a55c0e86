#pragma once

// JSON fixture formats for colour graphs, string assignments and test
// digraphs, plus the six-vertex three-colour worked example used as a
// golden fixture across the test suite.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "permtraffic/cyclotomic.hpp"
#include "permtraffic/digraphs.hpp"
#include "permtraffic/errors.hpp"

namespace permtraffic::fixtures {

using nlohmann::json;
using digraphs::ColourGraph;
using digraphs::StringAssignment;
using digraphs::TestDigraph;

constexpr const char* kDigraphSchema = "permtraffic/digraph/1";
constexpr const char* kColourGraphSchema = "permtraffic/colourgraph/1";
constexpr const char* kAssignmentSchema = "permtraffic/assignment/1";
constexpr const char* kMatrixSchema = "permtraffic/matrix/1";
constexpr const char* kMatrixBundleSchema = "permtraffic/matrices/1";
constexpr const char* kExperimentSchema = "permtraffic/experiment/1";

// Validation failure carrying the offending field path (CLI exit 2).
struct SchemaError : permtraffic::SchemaError {
    std::string path;
    SchemaError(std::string p, const std::string& msg)
        : permtraffic::SchemaError(p + ": " + msg), path(std::move(p)) {}
};

inline const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "." + key, "missing");
    return *it;
}

inline int need_int(const json& j, const std::string& key, const std::string& path) {
    const json& v = need(j, key, path);
    if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected an integer");
    return v.get<int>();
}

inline void check_schema(const json& j, const std::string& expect, const std::string& path) {
    const json& s = need(j, "schema", path);
    if (!s.is_string() || s.get<std::string>() != expect)
        throw SchemaError(path + ".schema", "expected \"" + expect + "\"");
}

namespace detail {

inline int colour_index(const json& v, const std::vector<std::string>& names,
                        int colour_count, const std::string& path) {
    if (v.is_number_integer()) {
        int c = v.get<int>();
        if (c < 0 || c >= colour_count) throw SchemaError(path, "colour index out of range");
        return c;
    }
    if (v.is_string()) {
        auto s = v.get<std::string>();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == s) return static_cast<int>(i);
        throw SchemaError(path, "unknown colour name \"" + s + "\"");
    }
    throw SchemaError(path, "expected a colour name or index");
}

inline int label_handle(const std::string& name, std::vector<std::string>& table) {
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i] == name) return static_cast<int>(i);
    table.push_back(name);
    return static_cast<int>(table.size()) - 1;
}

}  // namespace detail

inline ColourGraph colour_graph_from_json(const json& j, const std::string& path = "$") {
    std::vector<std::string> names;
    const json& cols = need(j, "colours", path);
    int m = 0;
    if (cols.is_number_integer()) {
        m = cols.get<int>();
    } else if (cols.is_array()) {
        m = static_cast<int>(cols.size());
        for (auto& c : cols) {
            if (!c.is_string()) throw SchemaError(path + ".colours", "expected names");
            names.push_back(c.get<std::string>());
        }
    } else {
        throw SchemaError(path + ".colours", "expected a count or a list of names");
    }
    std::vector<std::pair<int, int>> edges;
    if (j.contains("edges")) {
        const json& es = j.at("edges");
        if (!es.is_array()) throw SchemaError(path + ".edges", "expected an array");
        for (std::size_t i = 0; i < es.size(); ++i) {
            const json& e = es[i];
            std::string p = path + ".edges[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2) throw SchemaError(p, "expected a pair");
            edges.push_back({detail::colour_index(e[0], names, m, p + "[0]"),
                             detail::colour_index(e[1], names, m, p + "[1]")});
        }
    }
    try {
        return ColourGraph::make(m, edges, names);
    } catch (const std::invalid_argument& ex) {
        throw SchemaError(path, ex.what());
    }
}

inline json colour_graph_to_json(const ColourGraph& g) {
    json j;
    j["schema"] = kColourGraphSchema;
    if (!g.names.empty())
        j["colours"] = g.names;
    else
        j["colours"] = g.m;
    json es = json::array();
    for (auto& [a, b] : g.edges) {
        if (!g.names.empty())
            es.push_back({g.names[a], g.names[b]});
        else
            es.push_back({a, b});
    }
    j["edges"] = es;
    return j;
}

inline StringAssignment assignment_from_json(const json& j, const ColourGraph& g,
                                             const std::string& path = "$.strings") {
    StringAssignment a;
    a.string_count = need_int(j, "count", path);
    a.strings_of_colour.assign(g.m, {});
    for (int c = 0; c < g.m; ++c) {
        std::string key = g.names.empty() ? std::to_string(c) : g.names[c];
        const json& s = need(j, key, path);
        if (!s.is_array()) throw SchemaError(path + "." + key, "expected an array of string ids");
        for (auto& v : s) {
            if (!v.is_number_integer()) throw SchemaError(path + "." + key, "expected integers");
            a.strings_of_colour[c].push_back(v.get<int>());
        }
        std::sort(a.strings_of_colour[c].begin(), a.strings_of_colour[c].end());
    }
    std::string why;
    if (!digraphs::is_valid_assignment(a, g, &why)) throw SchemaError(path, why);
    return a;
}

inline json assignment_to_json(const StringAssignment& a, const ColourGraph& g) {
    json j;
    j["count"] = a.string_count;
    for (int c = 0; c < g.m; ++c) {
        std::string key = g.names.empty() ? std::to_string(c) : g.names[c];
        j[key] = a.strings_of_colour[c];
    }
    return j;
}

inline TestDigraph digraph_from_json(const json& j, const std::string& path = "$") {
    check_schema(j, kDigraphSchema, path);
    TestDigraph t;
    t.n = need_int(j, "vertices", path);
    if (t.n < 0) throw SchemaError(path + ".vertices", "negative");
    t.loops.assign(t.n, {});
    const json& cols = need(j, "colours", path);
    if (cols.is_number_integer()) {
        t.colour_count = cols.get<int>();
    } else if (cols.is_array()) {
        t.colour_count = static_cast<int>(cols.size());
        for (auto& c : cols) t.colour_names.push_back(c.get<std::string>());
    } else {
        throw SchemaError(path + ".colours", "expected a count or list of names");
    }
    const json& es = need(j, "edges", path);
    if (!es.is_array()) throw SchemaError(path + ".edges", "expected an array");
    for (std::size_t i = 0; i < es.size(); ++i) {
        const json& e = es[i];
        std::string p = path + ".edges[" + std::to_string(i) + "]";
        int src = need_int(e, "src", p);
        int dst = need_int(e, "dst", p);
        int colour = detail::colour_index(need(e, "colour", p), t.colour_names, t.colour_count,
                                          p + ".colour");
        const json& lv = need(e, "label", p);
        if (!lv.is_string()) throw SchemaError(p + ".label", "expected a name");
        int label = detail::label_handle(lv.get<std::string>(), t.label_names);
        bool star = e.value("star", false);
        try {
            t.add_edge(src, dst, colour, label, star);
        } catch (const std::invalid_argument& ex) {
            throw SchemaError(p, ex.what());
        }
    }
    if (j.contains("loops")) {
        const json& lp = j.at("loops");
        if (!lp.is_object()) throw SchemaError(path + ".loops", "expected an object");
        for (auto& [key, val] : lp.items()) {
            int v = -1;
            try {
                v = std::stoi(key);
            } catch (...) {
                throw SchemaError(path + ".loops." + key, "expected a vertex id key");
            }
            if (v < 0 || v >= t.n) throw SchemaError(path + ".loops." + key, "vertex out of range");
            if (!val.is_array()) throw SchemaError(path + ".loops." + key, "expected an array");
            for (auto& f : val) {
                if (f.is_string()) {
                    t.add_loop(v, detail::label_handle(f.get<std::string>(), t.label_names));
                } else if (f.is_object()) {
                    std::string nm = need(f, "label", path + ".loops." + key).get<std::string>();
                    t.add_loop(v, detail::label_handle(nm, t.label_names), f.value("star", false));
                } else {
                    throw SchemaError(path + ".loops." + key, "expected label names");
                }
            }
        }
    }
    return t;
}

inline json digraph_to_json(const TestDigraph& t) {
    json j;
    j["schema"] = kDigraphSchema;
    j["vertices"] = t.n;
    if (!t.colour_names.empty())
        j["colours"] = t.colour_names;
    else
        j["colours"] = t.colour_count;
    json es = json::array();
    for (auto& e : t.edges) {
        json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        if (!t.colour_names.empty())
            je["colour"] = t.colour_names[e.colour];
        else
            je["colour"] = e.colour;
        je["label"] = t.label_names.empty() ? std::to_string(e.label) : t.label_names[e.label];
        if (e.star) je["star"] = true;
        es.push_back(je);
    }
    j["edges"] = es;
    json lp = json::object();
    for (int v = 0; v < t.n; ++v) {
        if (t.loops[v].empty()) continue;
        json arr = json::array();
        for (auto& f : t.loops[v]) {
            json jf;
            jf["label"] = t.label_names.empty() ? std::to_string(f.label) : t.label_names[f.label];
            if (f.star) jf["star"] = true;
            arr.push_back(jf);
        }
        lp[std::to_string(v)] = arr;
    }
    if (!lp.empty()) j["loops"] = lp;
    return j;
}

// An assignment file bundles the colour graph with the string sets so it
// validates on its own.
inline std::pair<ColourGraph, StringAssignment> assignment_file_from_json(
    const json& j, const std::string& path = "$") {
    check_schema(j, kAssignmentSchema, path);
    ColourGraph g = colour_graph_from_json(need(j, "graph", path), path + ".graph");
    StringAssignment a = assignment_from_json(need(j, "strings", path), g, path + ".strings");
    return {std::move(g), std::move(a)};
}

inline json assignment_file_to_json(const ColourGraph& g, const StringAssignment& a) {
    json j;
    j["schema"] = kAssignmentSchema;
    j["graph"] = colour_graph_to_json(g);
    j["strings"] = assignment_to_json(a, g);
    return j;
}

// Cyclotomic entries are stored exactly: a plain integer, or an object
// {"m": conductor, "c": [a0, a1, ...]} listing power-basis coefficients.
inline cyc::CycInt cyc_from_json(const json& v, const std::string& path) {
    if (v.is_number_integer()) return cyc::CycInt(v.get<long long>());
    if (v.is_object()) {
        int m = need_int(v, "m", path);
        const json& c = need(v, "c", path);
        if (m < 1) throw SchemaError(path + ".m", "conductor must be positive");
        if (!c.is_array()) throw SchemaError(path + ".c", "expected coefficients");
        std::vector<long long> coeff;
        for (auto& x : c) {
            if (!x.is_number_integer()) throw SchemaError(path + ".c", "expected integers");
            coeff.push_back(x.get<long long>());
        }
        try {
            return cyc::CycInt::from_coefficients(m, std::move(coeff));
        } catch (const std::invalid_argument& ex) {
            throw SchemaError(path, ex.what());
        }
    }
    throw SchemaError(path, "expected an integer or {m, c}");
}

inline json cyc_to_json(const cyc::CycInt& v) {
    if (v.is_integer()) return json(v.integer_value());
    json j;
    j["m"] = v.conductor();
    j["c"] = v.coefficients();
    return j;
}

inline cyc::CycMatrix cyc_matrix_from_json(const json& j, const std::string& path = "$") {
    int rows = need_int(j, "rows", path);
    int cols = need_int(j, "cols", path);
    if (rows < 0 || cols < 0) throw SchemaError(path, "negative shape");
    const json& es = need(j, "entries", path);
    if (!es.is_array() || static_cast<int>(es.size()) != rows)
        throw SchemaError(path + ".entries", "expected " + std::to_string(rows) + " rows");
    cyc::CycMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = es[i];
        std::string p = path + ".entries[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw SchemaError(p, "expected " + std::to_string(cols) + " entries");
        for (int k = 0; k < cols; ++k)
            m.at(i, k) = cyc_from_json(row[k], p + "[" + std::to_string(k) + "]");
    }
    return m;
}

inline json cyc_matrix_to_json(const cyc::CycMatrix& m) {
    json j;
    j["schema"] = kMatrixSchema;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json es = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < m.cols(); ++k) row.push_back(cyc_to_json(m.at(i, k)));
        es.push_back(row);
    }
    j["entries"] = es;
    return j;
}

// A bundle holds named matrices; names are the row order everywhere.
inline std::vector<std::pair<std::string, cyc::CycMatrix>> bundle_from_json(
    const json& j, const std::string& path = "$") {
    check_schema(j, kMatrixBundleSchema, path);
    const json& ms = need(j, "matrices", path);
    if (!ms.is_object()) throw SchemaError(path + ".matrices", "expected named matrices");
    std::vector<std::pair<std::string, cyc::CycMatrix>> out;
    for (auto& [name, v] : ms.items())
        out.emplace_back(name, cyc_matrix_from_json(v, path + ".matrices." + name));
    return out;
}

inline json bundle_to_json(const std::vector<std::pair<std::string, cyc::CycMatrix>>& ms) {
    json j;
    j["schema"] = kMatrixBundleSchema;
    json named = json::object();
    for (auto& [name, m] : ms) {
        json mj = cyc_matrix_to_json(m);
        mj.erase("schema");
        named[name] = mj;
    }
    j["matrices"] = named;
    return j;
}

inline json load_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError(file, "cannot open file");
    json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw SchemaError("$", std::string("parse error in ") + file + ": " + ex.what());
    }
    return j;
}

// The running example: three colours B,G,R with the single commuting pair
// (B,R), strings S_B={0,1}, S_G={1,2}, S_R={2}, and the six-vertex
// eight-edge test digraph.
struct WorkedExample {
    ColourGraph colour_graph;
    StringAssignment assignment;
    TestDigraph digraph;
    std::vector<combinat::Partition> rho;    // floors per string
    std::vector<combinat::Partition> sigma;  // a tuple whose colour-component graphs are all trees
};

inline WorkedExample worked_example() {
    WorkedExample w;
    w.colour_graph = ColourGraph::make(3, {{0, 2}}, {"B", "G", "R"});
    w.assignment.string_count = 3;
    w.assignment.strings_of_colour = {{0, 1}, {1, 2}, {2}};

    TestDigraph t;
    t.n = 6;
    t.colour_count = 3;
    t.loops.assign(6, {});
    t.colour_names = {"B", "G", "R"};
    t.label_names = {"X1", "X2", "X3", "X4", "X5", "X6", "X7", "X8"};
    t.add_edge(0, 1, 2, 0);  // X1 red
    t.add_edge(1, 2, 1, 1);  // X2 green
    t.add_edge(1, 2, 0, 2);  // X3 blue
    t.add_edge(2, 3, 0, 3);  // X4 blue
    t.add_edge(2, 4, 1, 4);  // X5 green
    t.add_edge(3, 0, 1, 5);  // X6 green
    t.add_edge(3, 4, 1, 6);  // X7 green
    t.add_edge(4, 5, 0, 7);  // X8 blue
    w.digraph = t;

    using combinat::Partition;
    w.rho = digraphs::rho_tuple(t, w.assignment);
    w.sigma = {Partition::from_blocks(6, {{0, 1, 2, 3, 4}, {5}}),
               Partition::from_blocks(6, {{0, 1, 2, 3}, {4}, {5}}),
               Partition::from_blocks(6, {{0, 1, 2, 3}, {4, 5}})};
    return w;
}

}  // namespace permtraffic::fixtures
