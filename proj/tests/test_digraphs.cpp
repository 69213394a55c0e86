#include <catch2/catch_amalgamated.hpp>

#include "permtraffic/digraphs.hpp"
#include "permtraffic/fixtures.hpp"

using namespace permtraffic;
using namespace permtraffic::digraphs;
using combinat::Partition;

namespace {

int edges_between(const GccGraph& g, int left, int right_colour, int right_comp) {
    int n = 0;
    for (auto& e : g.edges) {
        auto& r = g.rights[e.right];
        if (e.left == left && r.colour == right_colour && r.comp == right_comp) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("string assignments for tiny colour graphs") {
    auto edge = ColourGraph::make(2, {{0, 1}});
    auto a = build_string_assignment(edge);
    CHECK(a.string_count == 2);
    CHECK(a.strings_of_colour[0] == std::vector<int>{0});
    CHECK(a.strings_of_colour[1] == std::vector<int>{1});
    CHECK(is_valid_assignment(a, edge));

    auto edgeless = ColourGraph::make(2, {});
    auto b = build_string_assignment(edgeless);
    CHECK(b.string_count == 3);
    CHECK(b.strings_of_colour[0] == std::vector<int>{0, 2});
    CHECK(b.strings_of_colour[1] == std::vector<int>{1, 2});
    CHECK(is_valid_assignment(b, edgeless));

    // swapping the graphs breaks validity both ways
    CHECK_FALSE(is_valid_assignment(a, edgeless));
    CHECK_FALSE(is_valid_assignment(b, edge));

    CHECK_THROWS_AS(ColourGraph::make(2, {{0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(ColourGraph::make(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("worked example assignment is valid") {
    auto w = fixtures::worked_example();
    CHECK(is_valid_assignment(w.assignment, w.colour_graph));
    auto built = build_string_assignment(w.colour_graph);
    CHECK(is_valid_assignment(built, w.colour_graph));
    // B and R commute, so their string sets must be disjoint
    CHECK(w.colour_graph.adjacent(0, 2));
    CHECK_FALSE(w.colour_graph.adjacent(0, 1));
}

TEST_CASE("reduced words in the colour graph") {
    auto g = ColourGraph::make(3, {{0, 1}});  // 0 and 1 commute
    CHECK_FALSE(is_g_reduced({}, g));
    CHECK(is_g_reduced({0}, g));
    CHECK_FALSE(is_g_reduced({0, 0}, g));
    CHECK_FALSE(is_g_reduced({0, 1, 0}, g));  // 1 commutes past
    CHECK(is_g_reduced({0, 2, 0}, g));        // 2 blocks
    CHECK(is_g_reduced({0, 1, 2, 0}, g));
    CHECK_FALSE(is_g_reduced({2, 0, 1, 0, 2}, g));
    CHECK_THROWS_AS(is_g_reduced({3}, g), std::invalid_argument);
}

TEST_CASE("restrict, quotient and components") {
    auto t = TestDigraph::make(4, 2, {{0, 1, 0, 0}, {1, 2, 1, 1}, {3, 3, 0, 2}});
    t.add_loop(0, 10);
    t.add_loop(2, 11);

    auto only0 = restrict_colours(t, {0});
    CHECK(only0.n == 4);
    CHECK(only0.edges.size() == 2);
    CHECK(components(only0).block_count() == 3);  // {0,1},{2},{3}

    auto q = quotient(t, Partition::from_blocks(4, {{0, 2}, {1}, {3}}));
    CHECK(q.n == 3);
    CHECK(q.edges.size() == 3);
    // loop decorations of 0 and 2 merge on the first block in vertex order
    REQUIRE(q.loops[0].size() == 2);
    CHECK(q.loops[0][0].label == 10);
    CHECK(q.loops[0][1].label == 11);
    // edge ids survive quotienting
    CHECK(q.edges[2].id == 2);
    CHECK(q.edges[2].src == q.edges[2].dst);

    CHECK_THROWS_AS(quotient(t, Partition::bottom(3)), std::invalid_argument);
    CHECK(components(TestDigraph::make(2, 1, {})).block_count() == 2);
}

TEST_CASE("floors and colour meets of the worked example") {
    auto w = fixtures::worked_example();
    auto& t = w.digraph;
    auto& a = w.assignment;

    REQUIRE(w.rho.size() == 3);
    CHECK(w.rho[0] == Partition::from_blocks(6, {{0, 1, 2, 3, 4}, {5}}));
    CHECK(w.rho[1] == Partition::from_blocks(6, {{0, 1}, {2}, {3}, {4}, {5}}));
    CHECK(w.rho[2] == Partition::from_blocks(6, {{0}, {1, 2, 3}, {4, 5}}));

    auto pi = w.rho;
    CHECK(pi_colour(pi, a, 0) == Partition::from_blocks(6, {{0, 1}, {2}, {3}, {4}, {5}}));
    CHECK(pi_colour(pi, a, 1) == Partition::bottom(6));
    CHECK(pi_colour(pi, a, 2) == Partition::from_blocks(6, {{0}, {1, 2, 3}, {4, 5}}));

    auto tb = colour_quotient(t, a, pi, 0);
    CHECK(tb.n == 5);
    CHECK(tb.edges.size() == 3);
    CHECK(components(tb).block_count() == 2);

    auto tg = colour_quotient(t, a, pi, 1);
    CHECK(tg.n == 6);
    CHECK(tg.edges.size() == 4);
    CHECK(components(tg).block_count() == 2);

    auto tr = colour_quotient(t, a, pi, 2);
    CHECK(tr.n == 3);
    CHECK(tr.edges.size() == 1);
    CHECK(components(tr).block_count() == 2);

    auto s0 = string_quotient(t, a, pi, 0);
    CHECK(s0.n == 2);
    CHECK(s0.edges.size() == 3);
    auto s1 = string_quotient(t, a, pi, 1);
    CHECK(s1.n == 5);
    CHECK(s1.edges.size() == 7);
    auto s2 = string_quotient(t, a, pi, 2);
    CHECK(s2.n == 3);
    CHECK(s2.edges.size() == 5);
}

TEST_CASE("colour-component graphs of the worked example at the floor") {
    auto w = fixtures::worked_example();
    auto pi = w.rho;

    auto g0 = gcc(w.digraph, w.assignment, pi, 0);
    CHECK(g0.left_count == 2);
    CHECK(g0.rights.size() == 2);
    CHECK(g0.edges.size() == 5);
    CHECK_FALSE(is_tree(g0));

    auto g1 = gcc(w.digraph, w.assignment, pi, 1);
    CHECK(g1.left_count == 5);
    CHECK(g1.rights.size() == 4);  // two blue components, two green
    CHECK(g1.edges.size() == 11);
    CHECK_FALSE(is_tree(g1));
    // the block {0,1} reaches its blue component once and its green
    // component twice
    auto pib = pi_colour(pi, w.assignment, 0);
    auto tb = colour_quotient(w.digraph, w.assignment, pi, 0);
    int blue_comp = components(tb).block_of(pib.block_of(0));
    auto pig = pi_colour(pi, w.assignment, 1);
    auto tg = colour_quotient(w.digraph, w.assignment, pi, 1);
    int green_comp = components(tg).block_of(pig.block_of(0));
    int left01 = pi[1].block_of(0);
    CHECK(edges_between(g1, left01, 0, blue_comp) == 1);
    CHECK(edges_between(g1, left01, 1, green_comp) == 2);

    auto g2 = gcc(w.digraph, w.assignment, pi, 2);
    CHECK(g2.left_count == 3);
    CHECK(g2.rights.size() == 4);
    CHECK(g2.edges.size() == 9);
    CHECK_FALSE(is_tree(g2));

    // below the floor the construction refuses
    auto bad = pi;
    bad[0] = Partition::bottom(6);
    CHECK_THROWS_AS(gcc(w.digraph, w.assignment, bad, 0), std::invalid_argument);
}

TEST_CASE("the sigma tuple makes every colour-component graph a tree") {
    auto w = fixtures::worked_example();
    for (int s = 0; s < 3; ++s) {
        CHECK(w.rho[s].leq(w.sigma[s]));
        CHECK(is_tree(gcc(w.digraph, w.assignment, w.sigma, s)));
    }
}

TEST_CASE("every partition tuple from the floor streams through gcc") {
    auto w = fixtures::worked_example();
    combinat::AboveStream s0(w.rho[0]);
    Partition p0;
    int trees = 0, total = 0;
    bool sigma_found = false;
    while (s0.next(p0)) {
        combinat::AboveStream s1(w.rho[1]);
        Partition p1;
        while (s1.next(p1)) {
            combinat::AboveStream s2(w.rho[2]);
            Partition p2;
            while (s2.next(p2)) {
                std::vector<Partition> pi = {p0, p1, p2};
                ++total;
                bool all = true;
                for (int s = 0; s < 3; ++s) all &= is_tree(gcc(w.digraph, w.assignment, pi, s));
                trees += all;
                if (all && pi == w.sigma) sigma_found = true;
            }
        }
    }
    CHECK(total == static_cast<int>(combinat::bell_number(2) * combinat::bell_number(5) *
                                    combinat::bell_number(3)));
    CHECK(trees >= 1);
    CHECK(sigma_found);
}

TEST_CASE("two-edge-connectivity reports") {
    // single edge: a bridge between two leaves
    auto t1 = TestDigraph::make(2, 1, {{0, 1, 0, 0}});
    auto r1 = two_edge_connected(t1);
    CHECK_FALSE(r1.two_edge_connected);
    CHECK(r1.cut_edges == std::vector<int>{0});
    CHECK(r1.leaf_count == 2);
    CHECK(r1.forest_edges.size() == 1);

    // doubled edge: two-edge-connected, forest is one isolated vertex
    auto t2 = TestDigraph::make(2, 1, {{0, 1, 0, 0}, {1, 0, 0, 1}});
    auto r2 = two_edge_connected(t2);
    CHECK(r2.two_edge_connected);
    CHECK(r2.cut_edges.empty());
    CHECK(r2.leaf_count == 2);

    // triangle with a pendant edge
    auto t3 = TestDigraph::make(4, 1, {{0, 1, 0, 0}, {1, 2, 0, 1}, {2, 0, 0, 2}, {2, 3, 0, 3}});
    auto r3 = two_edge_connected(t3);
    CHECK_FALSE(r3.two_edge_connected);
    CHECK(r3.cut_edges == std::vector<int>{3});
    CHECK(r3.tec_components == Partition::from_blocks(4, {{0, 1, 2}, {3}}));
    CHECK(r3.leaf_count == 2);

    // parallel pair plus a genuine bridge
    auto t4 = TestDigraph::make(3, 1, {{0, 1, 0, 0}, {0, 1, 0, 1}, {1, 2, 0, 2}});
    auto r4 = two_edge_connected(t4);
    CHECK(r4.cut_edges == std::vector<int>{2});

    // two disjoint cycles: bridgeless but disconnected, four leaf weights
    auto t5 = TestDigraph::make(4, 1, {{0, 1, 0, 0}, {1, 0, 0, 1}, {2, 3, 0, 2}, {3, 2, 0, 3}});
    auto r5 = two_edge_connected(t5);
    CHECK_FALSE(r5.two_edge_connected);
    CHECK(r5.cut_edges.empty());
    CHECK(r5.leaf_count == 4);

    // lone vertex with a self-loop
    auto t6 = TestDigraph::make(1, 1, {{0, 0, 0, 0}});
    auto r6 = two_edge_connected(t6);
    CHECK(r6.two_edge_connected);
    CHECK(r6.leaf_count == 2);

    // path of length 2: middle vertex is its own forest vertex of degree 2
    auto t7 = TestDigraph::make(3, 1, {{0, 1, 0, 0}, {1, 2, 0, 1}});
    auto r7 = two_edge_connected(t7);
    CHECK(r7.cut_edges.size() == 2);
    CHECK(r7.leaf_count == 2);

    // the worked example: only the tail edge X8 is a cut edge
    auto w = fixtures::worked_example();
    auto rw = two_edge_connected(w.digraph);
    CHECK_FALSE(rw.two_edge_connected);
    CHECK(rw.cut_edges == std::vector<int>{7});
    CHECK(rw.leaf_count == 2);
}

TEST_CASE("fixture files round-trip and match the in-code example") {
    auto w = fixtures::worked_example();

    auto jd = fixtures::load_json_file(std::string(PT_DATA_DIR) + "/appendix_digraph.json");
    auto t = fixtures::digraph_from_json(jd);
    CHECK(t.n == w.digraph.n);
    CHECK(t.edges.size() == w.digraph.edges.size());
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        CHECK(t.edges[i].src == w.digraph.edges[i].src);
        CHECK(t.edges[i].dst == w.digraph.edges[i].dst);
        CHECK(t.edges[i].colour == w.digraph.edges[i].colour);
        CHECK(t.edges[i].label == w.digraph.edges[i].label);
    }
    CHECK(t.label_names == w.digraph.label_names);

    auto jc = fixtures::load_json_file(std::string(PT_DATA_DIR) + "/appendix_colour_graph.json");
    auto g = fixtures::colour_graph_from_json(jc);
    CHECK(g.m == 3);
    CHECK(g.adjacent(0, 2));
    CHECK_FALSE(g.adjacent(0, 1));
    auto a = fixtures::assignment_from_json(jc.at("strings"), g);
    CHECK(a.strings_of_colour == w.assignment.strings_of_colour);

    // round trips
    auto t2 = fixtures::digraph_from_json(fixtures::digraph_to_json(t));
    CHECK(t2.edges.size() == t.edges.size());
    CHECK(t2.label_names == t.label_names);
    auto g2 = fixtures::colour_graph_from_json(fixtures::colour_graph_to_json(g));
    CHECK(g2.edges == g.edges);
}

TEST_CASE("schema errors carry field paths") {
    using fixtures::SchemaError;
    nlohmann::json j;
    j["schema"] = "permtraffic/digraph/1";
    j["vertices"] = 2;
    j["colours"] = {"A"};
    j["edges"] = {{{"src", 0}, {"dst", 5}, {"colour", "A"}, {"label", "X"}}};
    try {
        fixtures::digraph_from_json(j);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path == "$.edges[0]");
    }
    j["edges"][0]["dst"] = 1;
    j["edges"][0]["colour"] = "Z";
    try {
        fixtures::digraph_from_json(j);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path == "$.edges[0].colour");
    }
    j.erase("vertices");
    try {
        fixtures::digraph_from_json(j);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path == "$.vertices");
    }
}
