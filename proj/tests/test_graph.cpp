#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <set>
#include <unistd.h>

#include "oracles.hpp"
#include "refnet/graph.hpp"

using namespace refnet;

namespace {

RawReferralRecord rec(const std::string& a, const std::string& b, Weight w) {
    return RawReferralRecord{a, b, w, 2009};
}

// 10-digit NPI from a small integer.
std::string npi(int k) {
    std::string s = std::to_string(k);
    return std::string(10 - s.size(), '0') + s;
}

} // namespace

TEST_CASE("duplicate ordered pairs merge by weight summation") {
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 3), rec(npi(1), npi(2), 2)});
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
    auto a = reg.find(npi(1));
    auto b = reg.find(npi(2));
    REQUIRE(a);
    REQUIRE(b);
    CHECK(g.edge_weight(*a, *b) == 5);
}

TEST_CASE("empty stream gives an empty graph") {
    auto [g, reg] = build_graph({});
    CHECK(g.node_count() == 0);
    CHECK(g.edge_count() == 0);
}

TEST_CASE("registry covers every npi on any edge and inverts exactly") {
    auto [g, reg] = build_graph({rec(npi(5), npi(9), 1), rec(npi(9), npi(7), 2)});
    CHECK(reg.size() == 3);
    for (NodeId u = 0; u < g.node_count(); ++u) CHECK(*reg.find(reg.npi_of(u)) == u);
}

TEST_CASE("degree sums match edge count and adjacency mirrors its transpose") {
    RefGraph g = oracles::random_digraph(60, 400, 17);
    std::uint64_t in_sum = 0, out_sum = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
        in_sum += g.in_degree(u);
        out_sum += g.out_degree(u);
    }
    CHECK(in_sum == g.edge_count());
    CHECK(out_sum == g.edge_count());

    RefGraph t = g.transpose();
    for (NodeId u = 0; u < g.node_count(); ++u) {
        auto fwd = g.out_neighbors(u);
        auto rev = t.in_neighbors(u);
        REQUIRE(fwd.size() == rev.size());
        for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i] == rev[i]);
        for (NodeId v : fwd) CHECK(t.edge_weight(v, u) == g.edge_weight(u, v));
    }
}

TEST_CASE("single-state physicians label directly; multi-state follows referrals") {
    // 1 -> 2 with weight 10 (2 in NH), 1 -> 3 with weight 2 (3 in VT); 1 listed both.
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 10), rec(npi(1), npi(3), 2)});
    std::vector<NpiStateRecord> rows = {
        {npi(1), "NH", 2009}, {npi(1), "VT", 2009}, {npi(2), "NH", 2009}, {npi(3), "VT", 2009}};
    auto rep = assign_states(reg, g, rows);
    CHECK(rep.single_state == 2);
    CHECK(rep.multi_state == 1);
    CHECK(state_code(reg.state_of(*reg.find(npi(1)))) == "NH");
    CHECK(state_code(reg.state_of(*reg.find(npi(2)))) == "NH");
    CHECK(state_code(reg.state_of(*reg.find(npi(3)))) == "VT");
}

TEST_CASE("state ties break to the lexicographically smaller code, deterministically") {
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 5), rec(npi(1), npi(3), 5)});
    std::vector<NpiStateRecord> rows = {
        {npi(1), "VT", 2009}, {npi(1), "NH", 2009}, {npi(2), "VT", 2009}, {npi(3), "NH", 2009}};
    for (int run = 0; run < 3; ++run) {
        PhysicianRegistry r2 = reg;
        auto rep = assign_states(r2, g, rows);
        CHECK(rep.ties == 1);
        CHECK(state_code(r2.state_of(*r2.find(npi(1)))) == "NH");
    }
}

TEST_CASE("physicians with edges but no state row stay unlabeled and counted") {
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 1)});
    std::vector<NpiStateRecord> rows = {{npi(1), "NH", 2009}};
    auto rep = assign_states(reg, g, rows);
    CHECK(rep.unlabeled == 1);
    CHECK(reg.state_of(*reg.find(npi(2))) == kNoState);
}

TEST_CASE("multi-state physician with unlabeled neighbors falls back to listed states") {
    // 1 listed in {ME, VT}; its only neighbor 2 is listed in {VT, NH} (multi,
    // resolves to NH by its own neighbor 3). Round 2 gives 1 -> VT via 2's
    // label... construct: 2-3 edge heavier toward NH.
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 4), rec(npi(2), npi(3), 6)});
    std::vector<NpiStateRecord> rows = {{npi(1), "ME", 2009}, {npi(1), "VT", 2009},
                                        {npi(2), "VT", 2009}, {npi(2), "NH", 2009},
                                        {npi(3), "NH", 2009}};
    auto rep = assign_states(reg, g, rows);
    // Pass 1: 3=NH. Round 1: node 2 scores NH=6 vs VT=0 -> NH. Round 2: node 1
    // scores ME=0, VT=0 from labels; fallback uses 2's listed states {VT,NH}:
    // VT gets weight 4, ME gets 0 -> VT.
    CHECK(state_code(reg.state_of(*reg.find(npi(2)))) == "NH");
    CHECK(state_code(reg.state_of(*reg.find(npi(1)))) == "VT");
    CHECK(rep.rounds >= 1);
}

TEST_CASE("subnetwork extraction: intrastate and induced nesting") {
    // A(NH) -> B(VT), B -> C(NH)
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 1), rec(npi(2), npi(3), 1)});
    assign_states(reg, g, {{npi(1), "NH", 2009}, {npi(2), "VT", 2009}, {npi(3), "NH", 2009}});

    Subnetwork intra = extract_subnetwork(g, reg, SubnetworkKind::intrastate("NH"));
    CHECK(intra.graph.edge_count() == 0);
    CHECK(intra.graph.node_count() == 2); // both NH physicians, no NH-NH edges

    Subnetwork induced = extract_subnetwork(g, reg, SubnetworkKind::induced("NH"));
    CHECK(induced.graph.edge_count() == 2);
    CHECK(induced.graph.node_count() == 3);

    // Nesting: intrastate nodes/edges inside induced ones.
    std::set<NodeId> induced_parents(induced.to_parent.begin(), induced.to_parent.end());
    for (NodeId u : intra.to_parent) CHECK(induced_parents.count(u) == 1);
}

TEST_CASE("edge partition: intrastate totals + cross-state = national") {
    std::mt19937_64 rng(99);
    std::vector<RawReferralRecord> records;
    std::vector<NpiStateRecord> rows;
    const char* codes[] = {"NH", "VT", "ME", "MA"};
    for (int i = 1; i <= 40; ++i) rows.push_back({npi(i), codes[i % 4], 2009});
    std::uniform_int_distribution<int> node(1, 40);
    for (int e = 0; e < 200; ++e) {
        int a = node(rng), b = node(rng);
        if (a == b) continue;
        records.push_back(rec(npi(a), npi(b), 1 + e % 5));
    }
    auto [g, reg] = build_graph(records);
    assign_states(reg, g, rows);

    std::uint64_t national_edges = g.edge_count();
    std::uint64_t intra_total = 0;
    for (const char* c : codes)
        intra_total += extract_subnetwork(g, reg, SubnetworkKind::intrastate(c)).graph.edge_count();
    std::uint64_t cross = 0;
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v : g.out_neighbors(u))
            if (reg.state_of(u) != reg.state_of(v)) ++cross;
    CHECK(intra_total + cross == national_edges);
}

TEST_CASE("weak components: two disjoint triangles and a fully connected fixture") {
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges = {
        {0, 1, 1}, {1, 2, 1}, {2, 0, 1}, {3, 4, 1}, {4, 5, 1}, {5, 3, 1}};
    std::sort(edges.begin(), edges.end());
    RefGraph g = RefGraph::from_sorted_edges(6, edges);
    auto comps = weak_components(g);
    REQUIRE(comps.size() == 2);
    CHECK(comps[0].size() == 3);
    CHECK(comps[1].size() == 3);

    RefGraph full = oracles::random_digraph(5, 20, 3);
    CHECK(weak_components(full).size() == 1);
}

TEST_CASE("weak components match an independent union-find oracle on sparse ER") {
    // ~n*p*(n-1)/2 undirected edges at p=0.0005 on n=1000: many small comps.
    std::mt19937_64 rng(2024);
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (NodeId u = 0; u < 1000; ++u)
        for (NodeId v = u + 1; v < 1000; ++v)
            if (unif(rng) < 0.0005) {
                edges.emplace_back(u, v, 1);
                edges.emplace_back(v, u, 1);
            }
    std::sort(edges.begin(), edges.end());
    RefGraph g = RefGraph::from_sorted_edges(1000, edges);

    auto got = weak_components(g);
    auto want = oracles::union_find_components(g);
    REQUIRE(got.size() == want.size());
    std::set<std::vector<NodeId>> got_set(got.begin(), got.end());
    std::set<std::vector<NodeId>> want_set(want.begin(), want.end());
    CHECK(got_set == want_set);
}

TEST_CASE("diameter: path graph full sweep is exact") {
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    for (NodeId u = 0; u + 1 < 5; ++u) edges.emplace_back(u, u + 1, 1);
    RefGraph g = RefGraph::from_sorted_edges(5, edges);
    CHECK(approx_diameter(g, 5, 0) == 4);
    CHECK(approx_diameter(g, 100, 0) == 4);
}

TEST_CASE("diameter: single node is 0; empty graph throws") {
    RefGraph one = RefGraph::from_sorted_edges(1, {});
    CHECK(approx_diameter(one, 4, 0) == 0);
    RefGraph none;
    CHECK_THROWS_AS(approx_diameter(none, 4, 0), analysis_error);
}

TEST_CASE("diameter: full sweep equals all-pairs BFS oracle on a random fixture") {
    RefGraph g = oracles::random_digraph(500, 1200, 42);
    int exact = oracles::all_pairs_bfs_diameter(g);
    CHECK(approx_diameter(g, 500, 1) == exact);
    // Sampled double-sweep stays a lower bound and is seed-deterministic.
    int sampled = approx_diameter(g, 16, 7);
    CHECK(sampled <= exact);
    CHECK(approx_diameter(g, 16, 7) == sampled);
}

TEST_CASE("graph cache round-trips nodes, edges, weights, npis and states") {
    auto [g, reg] = build_graph({rec(npi(1), npi(2), 3), rec(npi(2), npi(3), 9)});
    assign_states(reg, g, {{npi(1), "NH", 2009}, {npi(2), "VT", 2009}, {npi(3), "NH", 2009}});
    auto path = std::filesystem::temp_directory_path() /
                ("refnet_cache_" + std::to_string(getpid()) + ".bin");
    save_graph_cache(path.string(), g, reg);

    RefGraph g2;
    PhysicianRegistry reg2;
    load_graph_cache(path.string(), g2, reg2);
    CHECK(g2.node_count() == g.node_count());
    CHECK(g2.edge_count() == g.edge_count());
    for (NodeId u = 0; u < g.node_count(); ++u) {
        CHECK(reg2.npi_of(u) == reg.npi_of(u));
        CHECK(reg2.state_of(u) == reg.state_of(u));
        auto a = g.out_neighbors(u);
        auto b = g2.out_neighbors(u);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i] == b[i]);
            CHECK(g.out_weights(u)[i] == g2.out_weights(u)[i]);
        }
    }
    std::filesystem::remove(path);

    RefGraph bad;
    PhysicianRegistry rbad;
    CHECK_THROWS_AS(load_graph_cache("/nonexistent/cache.bin", bad, rbad), input_error);
}
