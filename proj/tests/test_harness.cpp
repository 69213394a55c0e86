// File format round trips, the shipped fixtures against the in-code worked
// example, and end-to-end runs of the command line binary: artifacts appear,
// reruns are byte-identical, error exits carry the documented codes.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <permtraffic/cyclotomic.hpp>
#include <permtraffic/digraphs.hpp>
#include <permtraffic/fixtures.hpp>
#include <permtraffic/rng.hpp>
#include <permtraffic/traffic.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using permtraffic::cyc::CycInt;
using permtraffic::cyc::CycMatrix;
using permtraffic::rng::CounterRng;

namespace digraphs = permtraffic::digraphs;
namespace fixtures = permtraffic::fixtures;

const std::string kData = PT_DATA_DIR;
const std::string kCli = PT_CLI_PATH;
const std::string kSource = PT_SOURCE_DIR;

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir =
        fs::temp_directory_path() / ("pt_harness_" + std::to_string(::getpid() + counter++));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// run the CLI, capture the exit code; stdout goes to a file to keep the
// test output readable
int run_cli(const std::string& args, const fs::path& stdout_to = {}) {
    std::string cmd = kCli + " " + args;
    if (!stdout_to.empty())
        cmd += " > " + stdout_to.string() + " 2>&1";
    else
        cmd += " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

CycInt random_cyc(CounterRng& g) {
    static const int ms[] = {1, 3, 4, 6, 8, 12};
    int m = ms[g.below(6)];
    std::vector<long long> coeff;
    for (int i = 0; i < permtraffic::cyc::euler_phi(m); ++i)
        coeff.push_back(static_cast<long long>(g.below(7)) - 3);
    return CycInt::from_coefficients(m, coeff);
}

}  // namespace

TEST_CASE("matrix files round trip exactly") {
    CounterRng g(411, 0, 0);
    for (int rep = 0; rep < 10; ++rep) {
        int rows = 1 + static_cast<int>(g.below(4));
        int cols = 1 + static_cast<int>(g.below(4));
        CycMatrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) m.at(i, k) = random_cyc(g);
        json j = fixtures::cyc_matrix_to_json(m);
        CycMatrix back = fixtures::cyc_matrix_from_json(j);
        REQUIRE(back == m);
    }

    SECTION("bundles preserve names and order") {
        CycMatrix a(1, 1), b(2, 2);
        a.at(0, 0) = CycInt::zeta(3);
        b.at(0, 1) = CycInt(5);
        std::vector<std::pair<std::string, CycMatrix>> ms = {{"alpha", a}, {"beta", b}};
        auto back = fixtures::bundle_from_json(fixtures::bundle_to_json(ms));
        REQUIRE(back.size() == 2);
        REQUIRE(back[0].first == "alpha");
        REQUIRE(back[0].second == a);
        REQUIRE(back[1].second == b);
    }

    SECTION("schema violations carry field paths") {
        json j = {{"schema", fixtures::kMatrixSchema}, {"rows", 1}, {"cols", 2},
                  {"entries", {{1}}}};
        try {
            fixtures::cyc_matrix_from_json(j);
            FAIL("expected a schema error");
        } catch (const fixtures::SchemaError& e) {
            REQUIRE(std::string(e.what()).find("entries[0]") != std::string::npos);
        }
    }
}

TEST_CASE("assignment files round trip and validate") {
    auto w = fixtures::worked_example();
    json j = fixtures::assignment_file_to_json(w.colour_graph, w.assignment);
    auto [g, a] = fixtures::assignment_file_from_json(j);
    REQUIRE(g.m == 3);
    REQUIRE(g.adjacent(0, 2));
    REQUIRE_FALSE(g.adjacent(0, 1));
    REQUIRE(a.string_count == w.assignment.string_count);
    REQUIRE(a.strings_of_colour == w.assignment.strings_of_colour);

    SECTION("empty string sets are rejected") {
        json bad = j;
        bad["strings"]["R"] = json::array();
        REQUIRE_THROWS_AS(fixtures::assignment_file_from_json(bad), fixtures::SchemaError);
    }

    SECTION("overlap pattern must match adjacency") {
        json bad = j;
        bad["strings"]["R"] = {0, 2};  // B and R are adjacent, must stay disjoint
        REQUIRE_THROWS_AS(fixtures::assignment_file_from_json(bad), fixtures::SchemaError);
    }
}

TEST_CASE("shipped fixtures match the worked example") {
    auto w = fixtures::worked_example();

    json jg = fixtures::load_json_file(kData + "/appendix_colour_graph.json");
    auto g = fixtures::colour_graph_from_json(jg);
    REQUIRE(g.m == w.colour_graph.m);
    REQUIRE(g.edges == w.colour_graph.edges);
    REQUIRE(g.names == w.colour_graph.names);

    json ja = fixtures::load_json_file(kData + "/appendix_assignment.json");
    auto [ga, a] = fixtures::assignment_file_from_json(ja);
    REQUIRE(ga.edges == w.colour_graph.edges);
    REQUIRE(a.string_count == 3);
    REQUIRE(a.strings_of_colour == w.assignment.strings_of_colour);

    json jt = fixtures::load_json_file(kData + "/appendix_digraph.json");
    auto t = fixtures::digraph_from_json(jt);
    REQUIRE(t.n == w.digraph.n);
    REQUIRE(t.colour_count == 3);
    REQUIRE(t.edges.size() == w.digraph.edges.size());
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        REQUIRE(t.edges[i].src == w.digraph.edges[i].src);
        REQUIRE(t.edges[i].dst == w.digraph.edges[i].dst);
        REQUIRE(t.edges[i].colour == w.digraph.edges[i].colour);
        REQUIRE(t.label_names[t.edges[i].label] ==
                w.digraph.label_names[w.digraph.edges[i].label]);
    }
}

TEST_CASE("cli validate") {
    REQUIRE(run_cli("validate " + kData + "/appendix_colour_graph.json " + kData +
                    "/appendix_digraph.json " + kData + "/appendix_assignment.json " + kData +
                    "/example_matrices.json") == 0);

    SECTION("rejects broken fixtures with exit 2") {
        auto dir = temp_dir();
        {
            std::ofstream out(dir / "bad.json");
            out << R"({"schema": "permtraffic/colourgraph/1", "colours": ["A"],)"
                // self-loops cannot appear in a commutation graph
                << R"( "edges": [["A", "A"]]})";
        }
        REQUIRE(run_cli("validate " + (dir / "bad.json").string()) == 2);
        fs::remove_all(dir);
    }

    SECTION("rejects empty string sets") {
        auto dir = temp_dir();
        {
            std::ofstream out(dir / "empty.json");
            out << R"({"schema": "permtraffic/assignment/1",)"
                << R"( "graph": {"colours": ["B", "G"], "edges": []},)"
                << R"( "strings": {"count": 1, "B": [0], "G": []}})";
        }
        REQUIRE(run_cli("validate " + (dir / "empty.json").string()) == 2);
        fs::remove_all(dir);
    }
}

TEST_CASE("cli assign-strings produces a valid assignment artifact") {
    auto dir = temp_dir();
    auto out = dir / "assignment.json";
    REQUIRE(run_cli("assign-strings --config " + kSource + "/configs/assign_strings_bgr.json" +
                    " --out " + out.string()) == 0);
    auto [g, a] = fixtures::assignment_file_from_json(fixtures::load_json_file(out.string()));
    auto want = digraphs::build_string_assignment(g);
    REQUIRE(a.string_count == want.string_count);
    REQUIRE(a.strings_of_colour == want.strings_of_colour);
    REQUIRE(run_cli("validate " + out.string()) == 0);
    fs::remove_all(dir);
}

TEST_CASE("cli runs are deterministic") {
    auto dir = temp_dir();

    SECTION("same seed, same bytes; different seed, different bytes") {
        auto c1 = dir / "a.csv", c2 = dir / "b.csv", c3 = dir / "c.csv";
        std::string cfg = kSource + "/configs/simulate_two_free_m2.json";
        REQUIRE(run_cli("simulate --config " + cfg + " --out " + c1.string()) == 0);
        REQUIRE(run_cli("simulate --config " + cfg + " --out " + c2.string()) == 0);
        REQUIRE(run_cli("simulate --config " + cfg + " --seed 999 --out " + c3.string()) == 0);
        REQUIRE(slurp(c1) == slurp(c2));
        REQUIRE(slurp(c1) != slurp(c3));
    }

    SECTION("thread count does not change the bytes") {
        auto c1 = dir / "t1.csv", c4 = dir / "t4.csv";
        std::string cfg = kSource + "/configs/traffic_mc_appendix.json";
        std::string base = " traffic-mc --config " + cfg + " --out ";
        REQUIRE(std::system(("PERMTRAFFIC_THREADS=1 " + kCli + base + c1.string() +
                             " > /dev/null 2>&1").c_str()) == 0);
        REQUIRE(std::system(("PERMTRAFFIC_THREADS=4 " + kCli + base + c4.string() +
                             " > /dev/null 2>&1").c_str()) == 0);
        REQUIRE(slurp(c1) == slurp(c4));
    }

    fs::remove_all(dir);
}

TEST_CASE("cli traffic-expect totals match the library") {
    auto dir = temp_dir();
    auto out = dir / "te.csv";
    REQUIRE(run_cli("traffic-expect --config " + kSource +
                    "/configs/traffic_expect_appendix.json --out " + out.string()) == 0);
    std::string csv = slurp(out);

    // identity payloads make the oracle seed-independent
    auto w = fixtures::worked_example();
    permtraffic::traffic::StringModel m;
    m.assignment = w.assignment;
    m.N = 2;
    for (auto& e : w.digraph.edges)
        if (!m.edge_payload.count(e.label)) {
            int dim = m.colour_dim(e.colour);
            m.edge_payload[e.label] =
                permtraffic::linalg::Matrix::Identity(dim, dim);
        }
    auto rep = permtraffic::traffic::expected_trace(w.digraph, m);

    std::istringstream lines(csv);
    std::string line, last;
    long rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) {
            last = line;
            ++rows;
        }
    REQUIRE(last.rfind("TOTAL,", 0) == 0);
    double total = std::stod(last.substr(6));
    REQUIRE(total == Catch::Approx(rep.exact.real()).margin(1e-12));
    REQUIRE(rows == rep.tuple_count + 2);  // header + terms + total
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes") {
    auto dir = temp_dir();
    {
        std::ofstream out(dir / "missing.json");
        out << R"({"schema": "permtraffic/experiment/1", "kind": "traffic-mc", "seed": 1,)"
            << R"( "parameters": {"digraph": ")" << kData << R"(/appendix_digraph.json",)"
            << R"( "strings": ")" << kData << R"(/appendix_assignment.json", "N": 2}})";
    }
    REQUIRE(run_cli("traffic-mc --config " + (dir / "missing.json").string()) == 2);

    {
        std::ofstream out(dir / "cap.json");
        out << R"({"schema": "permtraffic/experiment/1", "kind": "detplus", "seed": 0,)"
            << R"( "parameters": {"inputs": [{"schema": "permtraffic/matrix/1",)"
            << R"( "rows": 1, "cols": 1, "entries": [[{"m": 977, "c": [1]}]]}]}})";
    }
    REQUIRE(run_cli("detplus --config " + (dir / "cap.json").string()) == 3);

    REQUIRE(run_cli("traffic-mc --config " + (dir / "does_not_exist.json").string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli microstates artifacts feed detplus") {
    auto dir = temp_dir();
    auto report = dir / "report.csv";
    auto bundle = dir / "bundle.json";
    {
        std::ofstream out(dir / "ms.json");
        out << R"({"schema": "permtraffic/experiment/1", "kind": "microstates", "seed": 0,)"
            << R"( "parameters": {"kind": "crossed-product", "n": 2, "matrices_out": ")"
            << bundle.string() << R"("}})";
    }
    REQUIRE(run_cli("microstates --config " + (dir / "ms.json").string() + " --out " +
                    report.string()) == 0);
    std::string csv = slurp(report);
    // every exactness flag on every row must be 1
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    const std::string all_flags = ",1,1,1,1,1";
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++rows;
        REQUIRE(line.size() > all_flags.size());
        REQUIRE(line.substr(line.size() - all_flags.size()) == all_flags);
    }
    REQUIRE(rows == 4);

    auto ms = fixtures::bundle_from_json(fixtures::load_json_file(bundle.string()));
    REQUIRE(ms.size() == 4);

    {
        std::ofstream out(dir / "dp.json");
        out << R"({"schema": "permtraffic/experiment/1", "kind": "detplus", "seed": 0,)"
            << R"( "parameters": {"inputs": [")" << bundle.string() << R"("]}})";
    }
    auto dpcsv = dir / "dp.csv";
    REQUIRE(run_cli("detplus --config " + (dir / "dp.json").string() + " --out " +
                    dpcsv.string()) == 0);
    std::string dp = slurp(dpcsv);
    std::istringstream dplines(dp);
    std::getline(dplines, line);
    while (std::getline(dplines, line))
        if (!line.empty()) REQUIRE(line.substr(line.size() - 2) == ",1");  // bound satisfied
    fs::remove_all(dir);
}
