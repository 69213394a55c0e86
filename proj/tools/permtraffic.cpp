// Batch experiment harness. One binary, one subcommand per experiment kind,
// a JSON config with a versioned schema, CSV artifacts written atomically,
// and a manifest echoed to stdout. Identical (config, seed) reruns produce
// byte-identical files regardless of PERMTRAFFIC_THREADS.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include <permtraffic/algnum.hpp>
#include <permtraffic/combinat.hpp>
#include <permtraffic/cyclotomic.hpp>
#include <permtraffic/digraphs.hpp>
#include <permtraffic/errors.hpp>
#include <permtraffic/fixtures.hpp>
#include <permtraffic/linalg.hpp>
#include <permtraffic/ncpoly.hpp>
#include <permtraffic/permmodel.hpp>
#include <permtraffic/rng.hpp>
#include <permtraffic/traffic.hpp>

namespace {

using nlohmann::json;
using permtraffic::ResourceError;
using permtraffic::cyc::CycInt;
using permtraffic::cyc::CycMatrix;
using permtraffic::digraphs::ColourGraph;
using permtraffic::digraphs::StringAssignment;
using permtraffic::digraphs::TestDigraph;
using permtraffic::fixtures::SchemaError;
using permtraffic::linalg::Complex;
using permtraffic::linalg::Matrix;
using permtraffic::rng::CounterRng;

namespace algnum = permtraffic::algnum;
namespace combinat = permtraffic::combinat;
namespace digraphs = permtraffic::digraphs;
namespace fixtures = permtraffic::fixtures;
namespace indexing = permtraffic::indexing;
namespace linalg = permtraffic::linalg;
namespace ncpoly = permtraffic::ncpoly;
namespace permmodel = permtraffic::permmodel;
namespace traffic = permtraffic::traffic;

constexpr const char* kToolVersion = "0.1.0";

// ---- small utilities ----

int thread_count() {
    const char* env = std::getenv("PERMTRAFFIC_THREADS");
    if (env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
        throw SchemaError("PERMTRAFFIC_THREADS", "expected an integer in [1, 1024]");
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Index-addressed parallel map: results land in caller-owned slots, so the
// reduction order (and therefore the output bytes) never depends on the
// worker count.
template <class Fn>
void parallel_for(long n, Fn&& fn) {
    int workers = std::min<long>(thread_count(), n);
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::mutex fail_mutex;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            try {
                for (long i = next++; i < n; i = next++) fn(i);
            } catch (...) {
                std::scoped_lock lock(fail_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

// SHA-256, compact implementation for config fingerprints in manifests.
struct Sha256 {
    static std::string hex(const std::string& data) {
        static const std::uint32_t k[64] = {
            0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
            0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
            0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
            0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
            0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
            0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
            0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
            0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
            0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
            0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
            0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
        std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                              0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
        std::string msg = data;
        std::uint64_t bits = static_cast<std::uint64_t>(msg.size()) * 8;
        msg.push_back(static_cast<char>(0x80));
        while (msg.size() % 64 != 56) msg.push_back('\0');
        for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
        auto rotr = [](std::uint32_t x, int s) { return (x >> s) | (x << (32 - s)); };
        for (std::size_t off = 0; off < msg.size(); off += 64) {
            std::uint32_t w[64];
            for (int i = 0; i < 16; ++i)
                w[i] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * i]))
                        << 24) |
                       (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * i + 1]))
                        << 16) |
                       (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * i + 2]))
                        << 8) |
                       static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * i + 3]));
            for (int i = 16; i < 64; ++i) {
                std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
                std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
                w[i] = w[i - 16] + s0 + w[i - 7] + s1;
            }
            std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                          hh = h[7];
            for (int i = 0; i < 64; ++i) {
                std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
                std::uint32_t ch = (e & f) ^ (~e & g);
                std::uint32_t t1 = hh + s1 + ch + k[i] + w[i];
                std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
                std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
                std::uint32_t t2 = s0 + maj;
                hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
            }
            h[0] += a; h[1] += b; h[2] += c; h[3] += d;
            h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
        }
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (std::uint32_t v : h)
            for (int i = 7; i >= 0; --i) out.push_back(digits[(v >> (4 * i)) & 0xf]);
        return out;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void row(std::vector<std::string> cells) {
        if (cells.size() != columns.size())
            throw std::logic_error("csv: cell count does not match the header");
        rows.push_back(std::move(cells));
    }

    std::string str() const {
        std::ostringstream out;
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << columns[i];
        out << "\n";
        for (auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << "\n";
        }
        return out.str();
    }
};

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    static std::atomic<int> counter{0};
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

// ---- config plumbing ----

struct Invocation {
    std::string kind;
    json config;
    std::string config_text;  // raw bytes, hashed into the manifest
    std::string config_dir;   // anchor for relative input paths
    std::uint64_t seed = 0;
    std::string out;
    json parameters;
};

const json& param(const Invocation& inv, const std::string& key) {
    return fixtures::need(inv.parameters, key, "$.parameters");
}

json param_or(const Invocation& inv, const std::string& key, json fallback) {
    if (inv.parameters.is_object() && inv.parameters.contains(key)) return inv.parameters.at(key);
    return fallback;
}

// A parameter that names a structured input: either inline JSON or a path.
// Relative paths are taken from the config file's directory so a config can
// be run from anywhere.
json resolve(const Invocation& inv, const json& v) {
    if (!v.is_string()) return v;
    std::filesystem::path p(v.get<std::string>());
    if (p.is_relative() && !inv.config_dir.empty() && !std::filesystem::exists(p))
        p = std::filesystem::path(inv.config_dir) / p;
    return fixtures::load_json_file(p.string());
}

Invocation load_invocation(const std::string& kind, const std::string& config_path,
                           std::optional<std::uint64_t> seed_override,
                           std::optional<std::string> out_override) {
    Invocation inv;
    inv.kind = kind;
    {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw SchemaError("$", "cannot open config " + config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        inv.config_text = buf.str();
    }
    try {
        inv.config = json::parse(inv.config_text);
    } catch (const std::exception& ex) {
        throw SchemaError("$", std::string("config parse error: ") + ex.what());
    }
    inv.config_dir = std::filesystem::path(config_path).parent_path().string();
    fixtures::check_schema(inv.config, fixtures::kExperimentSchema, "$");
    const json& jkind = fixtures::need(inv.config, "kind", "$");
    if (!jkind.is_string() || jkind.get<std::string>() != kind)
        throw SchemaError("$.kind", "config kind does not match the subcommand " + kind);
    if (inv.config.contains("seed")) {
        const json& s = inv.config.at("seed");
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw SchemaError("$.seed", "expected a 64-bit integer");
        inv.seed = s.get<std::uint64_t>();
    }
    if (seed_override) inv.seed = *seed_override;
    inv.out = inv.config.value("out", kind + ".csv");
    if (out_override) inv.out = *out_override;
    inv.parameters = fixtures::need(inv.config, "parameters", "$");
    if (!inv.parameters.is_object()) throw SchemaError("$.parameters", "expected an object");
    return inv;
}

void emit_manifest(const Invocation& inv, std::size_t rows, json extra = json::object()) {
    json m;
    m["tool"] = "permtraffic";
    m["version"] = kToolVersion;
    m["kind"] = inv.kind;
    m["seed"] = inv.seed;
    m["config_sha256"] = Sha256::hex(inv.config_text);
    m["schemas"] = {fixtures::kColourGraphSchema, fixtures::kDigraphSchema,
                    fixtures::kAssignmentSchema, fixtures::kMatrixSchema,
                    fixtures::kMatrixBundleSchema, fixtures::kExperimentSchema};
    m["out"] = inv.out;
    m["rows"] = rows;
    for (auto& [key, value] : extra.items()) m[key] = value;
    std::cout << m.dump(2) << "\n";
}

// ---- shared loaders ----

ColourGraph load_graph(const Invocation& inv) {
    return fixtures::colour_graph_from_json(resolve(inv, param(inv, "graph")),
                                            "$.parameters.graph");
}

// graph plus strings; strings may be inline, a path to an assignment file,
// or absent (auto-built)
std::pair<ColourGraph, StringAssignment> load_graph_and_strings(const Invocation& inv) {
    if (inv.parameters.contains("strings")) {
        json s = resolve(inv, inv.parameters.at("strings"));
        if (s.is_object() && s.contains("schema")) {
            auto [g, a] = fixtures::assignment_file_from_json(s, "$.parameters.strings");
            return {std::move(g), std::move(a)};
        }
        ColourGraph g = load_graph(inv);
        StringAssignment a = fixtures::assignment_from_json(s, g, "$.parameters.strings");
        return {std::move(g), std::move(a)};
    }
    ColourGraph g = load_graph(inv);
    StringAssignment a = digraphs::build_string_assignment(g);
    return {std::move(g), std::move(a)};
}

Matrix complex_matrix_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a matrix as rows");
    int rows = static_cast<int>(j.size());
    int cols = -1;
    Matrix m;
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        std::string p = path + "[" + std::to_string(i) + "]";
        if (!row.is_array()) throw SchemaError(p, "expected a row");
        if (cols < 0) {
            cols = static_cast<int>(row.size());
            m = Matrix::Zero(rows, cols);
        }
        if (static_cast<int>(row.size()) != cols) throw SchemaError(p, "ragged row");
        for (int k = 0; k < cols; ++k) {
            const json& e = row[k];
            if (e.is_number()) {
                m(i, k) = e.get<double>();
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
            } else {
                throw SchemaError(p + "[" + std::to_string(k) + "]",
                                  "expected a number or [re, im]");
            }
        }
    }
    return m;
}

int colour_ref(const json& v, const ColourGraph& g, const std::string& path) {
    return fixtures::detail::colour_index(v, g.names, g.m, path);
}

std::string colour_label(const ColourGraph& g, int c) {
    return g.names.empty() ? std::to_string(c) : g.names[c];
}

// ---- traffic payloads ----

// deterministic per-label payloads for the string model
traffic::StringModel build_string_model(const TestDigraph& t, const StringAssignment& a, int N,
                                        std::uint64_t seed, const std::string& payload_kind) {
    traffic::StringModel m;
    m.assignment = a;
    m.N = N;
    for (auto& e : t.edges) {
        if (m.edge_payload.count(e.label)) continue;
        int dim = m.colour_dim(e.colour);
        if (payload_kind == "identity") {
            m.edge_payload[e.label] = Matrix::Identity(dim, dim);
        } else {
            CounterRng gen(seed, 0, static_cast<std::uint64_t>(e.label));
            Matrix x(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int k = 0; k < dim; ++k) x(i, k) = Complex(gen.gaussian(), gen.gaussian());
            m.edge_payload[e.label] = std::move(x);
        }
    }
    long full = indexing::pow_int(N, a.string_count);
    for (int v = 0; v < t.n; ++v)
        for (auto& f : t.loops[v]) {
            if (m.loop_payload.count(f.label)) continue;
            CounterRng gen(seed, 1, static_cast<std::uint64_t>(f.label));
            linalg::Vector d(full);
            for (long i = 0; i < full; ++i) d(i) = Complex(gen.gaussian(), gen.gaussian());
            m.loop_payload[f.label] = std::move(d);
        }
    return m;
}

std::string partition_tuple_label(const std::vector<combinat::Partition>& pi) {
    std::ostringstream out;
    for (std::size_t s = 0; s < pi.size(); ++s) {
        if (s) out << "|";
        for (auto& block : pi[s].blocks()) {
            out << "{";
            for (std::size_t i = 0; i < block.size(); ++i) out << (i ? " " : "") << block[i];
            out << "}";
        }
    }
    return out.str();
}

// ---- subcommands ----

int run_assign_strings(const Invocation& inv) {
    ColourGraph g = load_graph(inv);
    StringAssignment a = digraphs::build_string_assignment(g);
    json artifact = fixtures::assignment_file_to_json(g, a);
    write_atomic(inv.out, artifact.dump(2) + "\n");
    json extra;
    extra["string_count"] = a.string_count;
    emit_manifest(inv, 0, extra);
    return 0;
}

int run_traffic_expect(const Invocation& inv) {
    TestDigraph t = fixtures::digraph_from_json(resolve(inv, param(inv, "digraph")),
                                                "$.parameters.digraph");
    auto [g, a] = load_graph_and_strings(inv);
    if (t.colour_count != g.m)
        throw SchemaError("$.parameters.digraph.colours", "digraph colour count differs from graph");
    int N = fixtures::need_int(inv.parameters, "N", "$.parameters");
    if (N < 1) throw SchemaError("$.parameters.N", "expected N >= 1");
    std::string mode = param_or(inv, "mode", json("exact")).get<std::string>();
    if (mode != "exact" && mode != "leading")
        throw SchemaError("$.parameters.mode", "expected \"exact\" or \"leading\"");
    std::string payload = param_or(inv, "payload", json("gaussian")).get<std::string>();
    if (payload != "gaussian" && payload != "identity")
        throw SchemaError("$.parameters.payload", "expected \"gaussian\" or \"identity\"");
    if (digraphs::component_count(t) != 1)
        throw SchemaError("$.parameters.digraph", "connected digraph required");

    traffic::StringModel m = build_string_model(t, a, N, inv.seed, payload);
    auto floors = digraphs::rho_tuple(t, a);

    Csv csv;
    std::string quantity =
        mode == "exact" ? "expected_gamma" : "tree_leading_term";
    csv.columns = {"pi", quantity + "_re", quantity + "_im"};
    Complex total = 0.0;

    std::vector<std::vector<combinat::Partition>> tuples;
    {
        std::vector<combinat::Partition> pi(floors.size());
        auto rec = [&](auto&& self, std::size_t s) -> void {
            if (s == floors.size()) {
                tuples.push_back(pi);
                return;
            }
            combinat::AboveStream stream(floors[s]);
            while (stream.next(pi[s])) self(self, s + 1);
        };
        rec(rec, 0);
    }
    std::vector<Complex> terms(tuples.size(), 0.0);
    parallel_for(static_cast<long>(tuples.size()), [&](long i) {
        const auto& pi = tuples[i];
        if (mode == "exact") {
            terms[i] = traffic::expected_gamma(t, m, pi);
            return;
        }
        for (int s = 0; s < a.string_count; ++s)
            if (!digraphs::is_tree(digraphs::gcc(t, a, pi, s))) return;
        Complex term = traffic::lambda_weight(t, m, pi);
        for (int c = 0; c < a.colour_count() && term != 0.0; ++c) {
            auto tc = digraphs::strip_loops(digraphs::colour_quotient(t, a, pi, c));
            term *= traffic::trace_tau_injective(tc, m.edge_payload, m.colour_dim(c));
        }
        terms[i] = term;
    });
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        total += terms[i];
        csv.row({partition_tuple_label(tuples[i]), fmt(terms[i].real()), fmt(terms[i].imag())});
    }
    csv.row({"TOTAL", fmt(total.real()), fmt(total.imag())});
    write_atomic(inv.out, csv.str());
    json extra;
    extra["N"] = N;
    extra["mode"] = mode;
    extra["tuples"] = tuples.size();
    emit_manifest(inv, csv.rows.size(), extra);
    return 0;
}

int run_traffic_mc(const Invocation& inv) {
    TestDigraph t = fixtures::digraph_from_json(resolve(inv, param(inv, "digraph")),
                                                "$.parameters.digraph");
    auto [g, a] = load_graph_and_strings(inv);
    if (t.colour_count != g.m)
        throw SchemaError("$.parameters.digraph.colours", "digraph colour count differs from graph");
    int N = fixtures::need_int(inv.parameters, "N", "$.parameters");
    if (N < 1) throw SchemaError("$.parameters.N", "expected N >= 1");
    long trials = fixtures::need_int(inv.parameters, "trials", "$.parameters");
    if (trials < 1) throw SchemaError("$.parameters.trials", "expected trials >= 1");
    std::string payload = param_or(inv, "payload", json("gaussian")).get<std::string>();
    bool with_exact = param_or(inv, "with_exact", json(false)).get<bool>();
    if (digraphs::component_count(t) != 1)
        throw SchemaError("$.parameters.digraph", "connected digraph required");

    traffic::StringModel m = build_string_model(t, a, N, inv.seed, payload);

    std::vector<Complex> values(trials, 0.0);
    parallel_for(trials, [&](long i) {
        auto p = traffic::ColourPermutations::draw(a, N, inv.seed, static_cast<std::uint64_t>(i));
        values[i] = traffic::model_trace(t, m, p);
    });
    Complex mean = 0.0;
    for (auto v : values) mean += v;
    mean /= static_cast<double>(trials);
    double var_re = 0.0, var_im = 0.0;
    for (auto v : values) {
        var_re += (v.real() - mean.real()) * (v.real() - mean.real());
        var_im += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
    }
    double std_error = std::sqrt(std::max(var_re, var_im) / static_cast<double>(trials) /
                                 static_cast<double>(trials));

    Csv csv;
    csv.columns = {"N", "trials", "expected_trace_mc_re", "expected_trace_mc_im", "std_error"};
    std::vector<std::string> cells = {fmt(N), fmt(trials), fmt(mean.real()), fmt(mean.imag()),
                                      fmt(std_error)};
    json extra;
    extra["N"] = N;
    if (with_exact) {
        auto rep = traffic::expected_trace(t, m);
        csv.columns.push_back("expected_trace_exact_re");
        csv.columns.push_back("expected_trace_exact_im");
        cells.push_back(fmt(rep.exact.real()));
        cells.push_back(fmt(rep.exact.imag()));
        extra["tuples"] = rep.tuple_count;
    }
    csv.row(std::move(cells));
    write_atomic(inv.out, csv.str());
    emit_manifest(inv, csv.rows.size(), extra);
    return 0;
}

permmodel::IndependenceConfig load_independence_config(const Invocation& inv) {
    permmodel::IndependenceConfig cfg;
    auto [g, a] = load_graph_and_strings(inv);
    cfg.graph = g;
    cfg.assignment = a;
    cfg.seed = inv.seed;

    const json& gens = param(inv, "generators");
    if (!gens.is_object())
        throw SchemaError("$.parameters.generators", "expected per-colour matrix lists");
    for (auto& [key, list] : gens.items()) {
        int c = colour_ref(json(key), g, "$.parameters.generators." + key);
        if (!list.is_array() || list.empty())
            throw SchemaError("$.parameters.generators." + key, "expected a list of matrices");
        std::vector<Matrix> ms;
        for (std::size_t i = 0; i < list.size(); ++i)
            ms.push_back(complex_matrix_from_json(
                list[i], "$.parameters.generators." + key + "[" + std::to_string(i) + "]"));
        for (auto& x : ms)
            if (x.rows() != x.cols() || x.rows() != ms.front().rows())
                throw SchemaError("$.parameters.generators." + key,
                                  "generators of one colour must share a square shape");
        cfg.generators[c] = std::move(ms);
    }

    const json& words = param(inv, "words");
    if (!words.is_array() || words.empty())
        throw SchemaError("$.parameters.words", "expected a list of words");
    for (std::size_t w = 0; w < words.size(); ++w) {
        const json& jw = words[w];
        std::string p = "$.parameters.words[" + std::to_string(w) + "]";
        if (!jw.is_array() || jw.empty()) throw SchemaError(p, "expected a list of factors");
        std::vector<permmodel::ExperimentWordFactor> word;
        for (std::size_t i = 0; i < jw.size(); ++i) {
            const json& jf = jw[i];
            std::string fp = p + "[" + std::to_string(i) + "]";
            permmodel::ExperimentWordFactor f;
            if (jf.is_array() && jf.size() == 2) {
                f.colour = colour_ref(jf[0], g, fp + "[0]");
                if (!jf[1].is_number_integer()) throw SchemaError(fp + "[1]", "expected an index");
                f.generator = jf[1].get<int>();
            } else if (jf.is_object()) {
                f.colour = colour_ref(fixtures::need(jf, "colour", fp), g, fp + ".colour");
                f.generator = fixtures::need_int(jf, "generator", fp);
            } else {
                throw SchemaError(fp, "expected [colour, generator] or an object");
            }
            auto it = cfg.generators.find(f.colour);
            if (it == cfg.generators.end() || f.generator < 0 ||
                f.generator >= static_cast<int>(it->second.size()))
                throw SchemaError(fp, "factor names a missing generator");
            word.push_back(f);
        }
        std::vector<int> colours;
        for (auto& f : word) colours.push_back(f.colour);
        if (!digraphs::is_g_reduced(colours, g))
            throw SchemaError(p, "colour word is not reduced for this graph");
        cfg.words.push_back(std::move(word));
    }

    const json& schedule = param(inv, "N_schedule");
    if (!schedule.is_array() || schedule.empty())
        throw SchemaError("$.parameters.N_schedule", "expected a list of dimensions");
    for (auto& v : schedule) {
        if (!v.is_number_integer() || v.get<int>() < 1)
            throw SchemaError("$.parameters.N_schedule", "expected positive integers");
        cfg.n_schedule.push_back(v.get<int>());
    }

    if (inv.parameters.contains("trials")) {
        const json& tr = inv.parameters.at("trials");
        if (!tr.is_number_integer() || tr.get<long>() < 0)
            throw SchemaError("$.parameters.trials", "expected a non-negative count");
        cfg.trials = tr.get<long>();
    }
    if (inv.parameters.contains("norm_cap")) {
        const json& nc = inv.parameters.at("norm_cap");
        if (!nc.is_number_integer() || nc.get<long>() < 1)
            throw SchemaError("$.parameters.norm_cap", "expected a positive cap");
        cfg.norm_cap = nc.get<long>();
    }
    if (inv.parameters.contains("norm_bound")) {
        const json& nb = inv.parameters.at("norm_bound");
        if (!nb.is_number() || nb.get<double>() < 0.0)
            throw SchemaError("$.parameters.norm_bound", "expected a non-negative bound");
        cfg.norm_bound = nb.get<double>();
    }
    return cfg;
}

int run_simulate(const Invocation& inv, bool with_verdict) {
    permmodel::IndependenceConfig cfg = load_independence_config(inv);
    auto reports = permmodel::independence_experiment(cfg);

    Csv csv;
    csv.columns = {"word",
                   "colour_word",
                   "N",
                   "trials",
                   "centered_word_2norm_mean",
                   "centered_word_2norm_median",
                   "centered_word_2norm_std",
                   "centered_word_2norm_max"};
    json decreasing = json::array();
    for (std::size_t w = 0; w < reports.size(); ++w) {
        auto& rep = reports[w];
        std::string colour_word;
        for (std::size_t i = 0; i < rep.word_colours.size(); ++i)
            colour_word += (i ? "." : "") + colour_label(cfg.graph, rep.word_colours[i]);
        bool strict = true;
        for (std::size_t i = 0; i < rep.samples.size(); ++i) {
            auto& s = rep.samples[i];
            if (i && !(s.median < rep.samples[i - 1].median)) strict = false;
            csv.row({fmt(static_cast<int>(w)), colour_word, fmt(s.N), fmt(s.trials), fmt(s.mean),
                     fmt(s.median), fmt(s.std_dev), fmt(s.max)});
        }
        decreasing.push_back(strict);
    }
    write_atomic(inv.out, csv.str());
    json extra;
    if (with_verdict) extra["median_decreasing"] = decreasing;
    emit_manifest(inv, csv.rows.size(), extra);
    return 0;
}

// named matrices from matrix files and bundles, rows ordered as given
std::vector<std::pair<std::string, CycMatrix>> load_matrix_inputs(const Invocation& inv) {
    const json& inputs = param(inv, "inputs");
    if (!inputs.is_array() || inputs.empty())
        throw SchemaError("$.parameters.inputs", "expected a list of matrix files");
    std::vector<std::pair<std::string, CycMatrix>> out;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::string p = "$.parameters.inputs[" + std::to_string(i) + "]";
        json j = resolve(inv, inputs[i]);
        std::string origin = inputs[i].is_string() ? inputs[i].get<std::string>() : p;
        const json& schema = fixtures::need(j, "schema", p);
        if (schema == fixtures::kMatrixSchema) {
            out.emplace_back(origin, fixtures::cyc_matrix_from_json(j, p));
        } else if (schema == fixtures::kMatrixBundleSchema) {
            for (auto& [name, m] : fixtures::bundle_from_json(j, p))
                out.emplace_back(origin + "#" + name, std::move(m));
        } else {
            throw SchemaError(p + ".schema", "expected a matrix or matrix bundle");
        }
    }
    return out;
}

int run_detplus(const Invocation& inv) {
    auto matrices = load_matrix_inputs(inv);
    double rel = param_or(inv, "rel_threshold", json(-1.0)).get<double>();

    Csv csv;
    csv.columns = {"matrix",
                   "rows",
                   "cols",
                   "rank",
                   "det_plus",
                   "det_plus_root",
                   "sigma_min_kept",
                   "sigma_max_dropped",
                   "svd_threshold",
                   "galois_orbit_size",
                   "galois_norm_bound",
                   "orbit_determinant_bound",
                   "bound_satisfied"};
    std::vector<std::vector<std::string>> rows(matrices.size());
    parallel_for(static_cast<long>(matrices.size()), [&](long i) {
        auto& [name, m] = matrices[i];
        auto rep = algnum::det_plus_report(m.to_complex_matrix(), rel);
        std::vector<std::string> cells = {name,
                                          fmt(m.rows()),
                                          fmt(m.cols()),
                                          fmt(rep.rank),
                                          fmt(rep.value),
                                          "",
                                          fmt(rep.sigma_min_kept),
                                          fmt(rep.sigma_max_dropped),
                                          fmt(rep.threshold),
                                          "",
                                          "",
                                          "",
                                          ""};
        if (m.rows() == m.cols() && m.rows() > 0) {
            double root = std::pow(rep.value, 1.0 / static_cast<double>(m.rows()));
            auto orbit = algnum::galois_orbit(m);
            double bound = algnum::orbit_determinant_bound(orbit);
            cells[5] = fmt(root);
            cells[9] = fmt(orbit.orbit_size);
            cells[10] = fmt(orbit.norm_bound);
            cells[11] = fmt(bound);
            cells[12] = root + 1e-12 >= bound ? "1" : "0";
        }
        rows[i] = std::move(cells);
    });
    for (auto& r : rows) csv.row(std::move(r));
    write_atomic(inv.out, csv.str());
    emit_manifest(inv, csv.rows.size());
    return 0;
}

int run_microstates(const Invocation& inv) {
    std::string kind = param(inv, "kind").get<std::string>();
    json extra;
    Csv csv;
    std::vector<std::pair<std::string, CycMatrix>> bundle;

    if (kind == "crossed-product") {
        int n = fixtures::need_int(inv.parameters, "n", "$.parameters");
        if (n < 1 || n > 16) throw SchemaError("$.parameters.n", "expected n in [1, 16]");
        auto cp = algnum::crossed_product_microstate(n);
        csv.columns = {"generator",       "chi",
                       "g",               "dim",
                       "conductor",       "entries_in_zero_or_roots",
                       "product_law_exact", "adjoint_law_exact",
                       "diag_equals_trace_identity", "trace_matches_abstract"};
        for (int chi = 0; chi < n; ++chi)
            for (int g = 0; g < n; ++g) {
                const CycMatrix& pm = cp.at(chi, g);
                std::string name = "p_" + std::to_string(chi) + "_" + std::to_string(g);
                bundle.emplace_back(name, pm);

                bool entries_ok = true;
                for (int i = 0; i < pm.rows() && entries_ok; ++i)
                    for (int k = 0; k < pm.cols() && entries_ok; ++k) {
                        const CycInt& e = pm.at(i, k);
                        if (e.is_zero()) continue;
                        bool root = false;
                        for (int t = 0; t < n && !root; ++t)
                            root = e == CycInt::zeta_power(n, t);
                        entries_ok = root;
                    }

                bool product_ok = true;
                for (int chi2 = 0; chi2 < n && product_ok; ++chi2)
                    for (int g2 = 0; g2 < n && product_ok; ++g2) {
                        CycMatrix want = cp.at(chi + chi2, g + g2);
                        product_ok = pm * cp.at(chi2, g2) ==
                                     CycInt::zeta_power(n, chi2 * g) * want;
                    }

                bool adjoint_ok =
                    pm.adjoint() == CycInt::zeta_power(n, chi * g) * cp.at(-chi, -g);

                CycMatrix diag = pm.diag_part();
                CycMatrix want_diag = CycMatrix::identity(pm.rows());
                bool diag_ok = diag == cp.abstract_trace(chi, g) * want_diag;

                bool trace_ok =
                    pm.trace() == CycInt(pm.rows()) * cp.abstract_trace(chi, g);

                csv.row({name, fmt(chi), fmt(g), fmt(pm.rows()), fmt(pm.conductor()),
                         entries_ok ? "1" : "0", product_ok ? "1" : "0", adjoint_ok ? "1" : "0",
                         diag_ok ? "1" : "0", trace_ok ? "1" : "0"});
            }
        extra["n"] = n;
    } else if (kind == "direct-sum") {
        const json& parts = param(inv, "parts");
        if (!parts.is_array() || parts.empty())
            throw SchemaError("$.parameters.parts", "expected a list of weighted parts");
        std::vector<algnum::WeightedTuple> tuples;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            std::string p = "$.parameters.parts[" + std::to_string(i) + "]";
            int n = fixtures::need_int(parts[i], "n", p);
            if (n < 1 || n > 16) throw SchemaError(p + ".n", "expected n in [1, 16]");
            const json& w = fixtures::need(parts[i], "weight", p);
            if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() ||
                !w[1].is_number_integer())
                throw SchemaError(p + ".weight", "expected [numerator, denominator]");
            algnum::WeightedTuple tup;
            tup.weight_num = w[0].get<long long>();
            tup.weight_den = w[1].get<long long>();
            tup.matrices = algnum::crossed_product_microstate(n).generators;
            tuples.push_back(std::move(tup));
        }
        for (auto& tup : tuples)
            if (tup.matrices.size() != tuples.front().matrices.size())
                throw SchemaError("$.parameters.parts", "parts must share one tuple length");
        long long cap = param_or(inv, "dim_cap", json(1 << 20)).get<long long>();
        algnum::DirectSumMicrostates sum;
        try {
            sum = algnum::direct_sum_microstates(tuples, cap);
        } catch (const std::invalid_argument& ex) {
            throw SchemaError("$.parameters.parts", ex.what());
        }
        csv.columns = {"object", "dim", "conductor", "trace_re", "trace_im"};
        for (std::size_t i = 0; i < sum.matrices.size(); ++i) {
            auto& m = sum.matrices[i];
            std::string name = "x_" + std::to_string(i);
            bundle.emplace_back(name, m);
            Complex tr = m.trace().to_complex();
            csv.row({name, fmt(m.rows()), fmt(m.conductor()), fmt(tr.real()), fmt(tr.imag())});
        }
        for (std::size_t i = 0; i < sum.block_projections.size(); ++i) {
            auto& m = sum.block_projections[i];
            std::string name = "proj_" + std::to_string(i);
            bundle.emplace_back(name, m);
            Complex tr = m.trace().to_complex();
            csv.row({name, fmt(m.rows()), fmt(m.conductor()), fmt(tr.real()), fmt(tr.imag())});
        }
        extra["dim"] = sum.dim;
        extra["multiplicities"] = sum.multiplicities;
    } else {
        throw SchemaError("$.parameters.kind", "expected \"crossed-product\" or \"direct-sum\"");
    }

    if (inv.parameters.contains("matrices_out")) {
        std::string path = inv.parameters.at("matrices_out").get<std::string>();
        write_atomic(path, fixtures::bundle_to_json(bundle).dump(2) + "\n");
        extra["matrices_out"] = path;
    }
    write_atomic(inv.out, csv.str());
    emit_manifest(inv, csv.rows.size(), extra);
    return 0;
}

int run_df_experiment(const Invocation& inv) {
    int r = fixtures::need_int(inv.parameters, "variables", "$.parameters");
    if (r < 1) throw SchemaError("$.parameters.variables", "expected at least one variable");
    const json& jrel = param(inv, "relations");
    if (!jrel.is_array()) throw SchemaError("$.parameters.relations", "expected polynomials");
    std::vector<std::string> texts;
    std::vector<ncpoly::ExactPoly> relations;
    for (std::size_t i = 0; i < jrel.size(); ++i) {
        if (!jrel[i].is_string())
            throw SchemaError("$.parameters.relations[" + std::to_string(i) + "]",
                              "expected a polynomial string");
        texts.push_back(jrel[i].get<std::string>());
        relations.push_back(ncpoly::parse_poly(texts.back(), r));
    }

    const json& schedule = param(inv, "n_schedule");
    if (!schedule.is_array() || schedule.empty())
        throw SchemaError("$.parameters.n_schedule", "expected crossed product sizes");
    std::vector<int> ns;
    for (auto& v : schedule) {
        if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 16)
            throw SchemaError("$.parameters.n_schedule", "expected sizes in [1, 16]");
        ns.push_back(v.get<int>());
    }

    std::vector<std::pair<int, int>> tuple_spec;
    if (inv.parameters.contains("tuple")) {
        const json& jt = inv.parameters.at("tuple");
        if (!jt.is_array()) throw SchemaError("$.parameters.tuple", "expected [chi, g] pairs");
        for (auto& v : jt) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
                !v[1].is_number_integer())
                throw SchemaError("$.parameters.tuple", "expected [chi, g] pairs");
            tuple_spec.push_back({v[0].get<int>(), v[1].get<int>()});
        }
    } else {
        tuple_spec = {{1, 0}, {0, 1}};
    }
    if (static_cast<int>(tuple_spec.size()) != r)
        throw SchemaError("$.parameters.tuple", "tuple length must match the variable count");
    double rel_threshold = param_or(inv, "rel_threshold", json(-1.0)).get<double>();

    std::vector<std::vector<CycMatrix>> microstates;
    for (int n : ns) {
        auto cp = algnum::crossed_product_microstate(n);
        std::vector<CycMatrix> tuple;
        for (auto [chi, g] : tuple_spec) tuple.push_back(cp.at(chi, g));
        microstates.push_back(std::move(tuple));
    }

    Csv csv;
    csv.columns = {"table",          "relation",       "n",
                   "matrix_rows",    "matrix_cols",    "rank",
                   "kernel_fraction", "det_plus",      "det_plus_root",
                   "sigma_min_kept", "svd_threshold",  "galois_orbit_size",
                   "galois_norm_bound", "orbit_determinant_bound"};

    std::vector<std::vector<std::vector<ncpoly::NcBiPoly<CycInt>>>> dfs(1);
    try {
        dfs[0] = ncpoly::build_DF(relations, r);
    } catch (const std::invalid_argument& ex) {
        throw SchemaError("$.parameters.relations", ex.what());
    }
    for (std::size_t k = 0; k < ns.size(); ++k) {
        std::vector<Matrix> images;
        for (auto& m : microstates[k]) images.push_back(m.to_complex_matrix());
        Matrix df = ncpoly::evaluate_DF(dfs[0], images);
        auto rep = ncpoly::rank_defect_report(df, images.front().rows(), rel_threshold);
        csv.row({"relation_matrix", "", fmt(ns[k]), fmt(static_cast<long>(df.rows())),
                 fmt(static_cast<long>(df.cols())), fmt(rep.rank), fmt(rep.kernel_fraction),
                 fmt(rep.det_plus), "", fmt(rep.sigma_min_kept), fmt(rep.threshold), "", "", ""});
    }

    json certs = json::array();
    for (std::size_t rel = 0; rel < relations.size(); ++rel) {
        auto table = algnum::liminf_certificate(microstates, relations[rel], rel_threshold);
        for (auto& row : table.rows)
            csv.row({"liminf", texts[rel], fmt(ns[row.k]), fmt(row.n), fmt(row.n), "", "", "",
                     fmt(row.det_plus_root), "", "", fmt(row.orbit_size), fmt(row.norm_bound),
                     fmt(row.bound)});
        json c;
        c["relation"] = texts[rel];
        c["uniform_bound"] = table.uniform_bound;
        c["all_above"] = table.all_above;
        certs.push_back(c);
    }

    write_atomic(inv.out, csv.str());
    json extra;
    extra["certificates"] = certs;
    emit_manifest(inv, csv.rows.size(), extra);
    return 0;
}

int run_validate(const std::vector<std::string>& files) {
    if (files.empty()) throw SchemaError("$", "validate: no files given");
    bool ok = true;
    for (auto& file : files) {
        try {
            json j = fixtures::load_json_file(file);
            const json& schema = fixtures::need(j, "schema", "$");
            std::ostringstream line;
            if (schema == fixtures::kColourGraphSchema) {
                ColourGraph g = fixtures::colour_graph_from_json(j);
                line << g.m << " colours, " << g.edges.size() << " commuting pairs";
            } else if (schema == fixtures::kDigraphSchema) {
                TestDigraph t = fixtures::digraph_from_json(j);
                auto two = digraphs::two_edge_connected(t);
                line << t.n << " vertices, " << t.edges.size() << " edges, " << t.colour_count
                     << " colours, " << digraphs::component_count(t) << " component(s)"
                     << (two.two_edge_connected ? ", two-edge-connected" : "");
            } else if (schema == fixtures::kAssignmentSchema) {
                auto [g, a] = fixtures::assignment_file_from_json(j);
                line << a.string_count << " strings over " << g.m << " colours";
            } else if (schema == fixtures::kMatrixSchema) {
                CycMatrix m = fixtures::cyc_matrix_from_json(j);
                line << m.rows() << "x" << m.cols() << ", conductor " << m.conductor();
            } else if (schema == fixtures::kMatrixBundleSchema) {
                auto ms = fixtures::bundle_from_json(j);
                line << ms.size() << " matrices";
            } else if (schema == fixtures::kExperimentSchema) {
                static const std::vector<std::string> kinds = {
                    "assign-strings", "traffic-expect", "traffic-mc",      "simulate",
                    "independence-test", "detplus",     "microstates",     "df-experiment"};
                std::string kind = fixtures::need(j, "kind", "$").get<std::string>();
                if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
                    throw SchemaError("$.kind", "unknown experiment kind " + kind);
                if (!fixtures::need(j, "parameters", "$").is_object())
                    throw SchemaError("$.parameters", "expected an object");
                line << "experiment config, kind " << kind;
            } else {
                throw SchemaError("$.schema", "unknown schema");
            }
            std::cout << file << ": ok (" << line.str() << ")\n";
        } catch (const permtraffic::SchemaError& ex) {
            std::cout << file << ": REJECTED (" << ex.what() << ")\n";
            ok = false;
        }
    }
    if (!ok) throw SchemaError("$", "validation failed");
    return 0;
}

int usage(std::ostream& out) {
    out << "usage: permtraffic <subcommand> --config FILE [--seed N] [--out PATH]\n"
           "       permtraffic validate FILE...\n"
           "\n"
           "subcommands:\n"
           "  assign-strings     build the string assignment of a colour graph\n"
           "  traffic-expect     exact expected traffic moment, term by term\n"
           "  traffic-mc         Monte Carlo estimate of the expected moment\n"
           "  simulate           centered word statistics over a dimension schedule\n"
           "  independence-test  simulate plus the median decay verdict\n"
           "  detplus            pseudo-determinants and Galois orbit bounds\n"
           "  microstates        exact microstate constructions, relation checks\n"
           "  df-experiment      relation matrix rank defects and liminf tables\n"
           "  validate           check fixture files against their schemas\n"
           "\n"
           "PERMTRAFFIC_THREADS limits the worker count (default: hardware).\n";
    return out.rdbuf() == std::cout.rdbuf() ? 0 : 64;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args[0] == "--help" || args[0] == "-h") return usage(std::cout);
    std::string sub = args[0];

    try {
        if (sub == "validate") {
            return run_validate({args.begin() + 1, args.end()});
        }

        std::optional<std::string> config_path, out_override;
        std::optional<std::uint64_t> seed_override;
        for (std::size_t i = 1; i < args.size(); ++i) {
            auto need_value = [&](const std::string& flag) -> std::string {
                if (i + 1 >= args.size()) throw SchemaError(flag, "missing value");
                return args[++i];
            };
            if (args[i] == "--config") {
                config_path = need_value("--config");
            } else if (args[i] == "--seed") {
                std::string v = need_value("--seed");
                try {
                    seed_override = std::stoull(v);
                } catch (...) {
                    throw SchemaError("--seed", "expected a 64-bit integer");
                }
            } else if (args[i] == "--out") {
                out_override = need_value("--out");
            } else {
                throw SchemaError(args[i], "unknown flag");
            }
        }
        if (!config_path) throw SchemaError("--config", "required");

        Invocation inv = load_invocation(sub, *config_path, seed_override, out_override);
        if (sub == "assign-strings") return run_assign_strings(inv);
        if (sub == "traffic-expect") return run_traffic_expect(inv);
        if (sub == "traffic-mc") return run_traffic_mc(inv);
        if (sub == "simulate") return run_simulate(inv, false);
        if (sub == "independence-test") return run_simulate(inv, true);
        if (sub == "detplus") return run_detplus(inv);
        if (sub == "microstates") return run_microstates(inv);
        if (sub == "df-experiment") return run_df_experiment(inv);
        std::cerr << "unknown subcommand: " << sub << "\n";
        return usage(std::cerr);
    } catch (const permtraffic::SchemaError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const ResourceError& ex) {
        std::cerr << "resource cap: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
