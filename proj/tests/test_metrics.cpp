#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "refnet/metrics.hpp"
#include "refnet/nullmodels.hpp"
#include "refnet/stats.hpp"

using namespace refnet;

namespace {

RefGraph make_graph(std::size_t n, std::vector<std::tuple<NodeId, NodeId, Weight>> edges) {
    std::sort(edges.begin(), edges.end());
    return RefGraph::from_sorted_edges(n, edges);
}

// Six-node illustrative network: A=0 B=1 C=2 D=3 E=4 F=5.
// A<->D mutual, B->E directional, (A,B,C) an undirected triangle,
// C->F the only edge at F.
RefGraph illustrative() {
    return make_graph(6, {{0, 1, 1},
                          {0, 2, 1},
                          {0, 3, 1},
                          {1, 2, 1},
                          {1, 4, 1},
                          {2, 0, 1},
                          {2, 5, 1},
                          {3, 0, 1}});
}

// Naive undirected clustering from scratch (adjacency matrix).
struct NaiveClustering {
    double global_c = 0, local_c = 0;
};
NaiveClustering naive_clustering(const RefGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.out_neighbors(u)) {
            adj[u][v] = true;
            adj[v][u] = true;
        }
    std::uint64_t triangles3 = 0, triples = 0;
    double local_sum = 0;
    std::size_t local_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j) k += adj[i][j];
        std::uint64_t tri = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b)
                if (adj[i][a] && adj[i][b] && adj[a][b]) ++tri;
        triples += k * (k - 1) / 2;
        triangles3 += tri;
        if (k >= 2) {
            local_sum += static_cast<double>(tri) / static_cast<double>(k * (k - 1) / 2);
            ++local_n;
        }
    }
    NaiveClustering res;
    res.global_c = triples ? static_cast<double>(triangles3) / static_cast<double>(triples) : 0.0;
    res.local_c = local_n ? local_sum / static_cast<double>(local_n) : 0.0;
    return res;
}

} // namespace

TEST_CASE("illustrative fixture degrees: A in 2 / out 3, F in 1 / out 0") {
    DegreeStats ds = degree_stats(illustrative(), false);
    CHECK(ds.in_degrees[0] == 2);
    CHECK(ds.out_degrees[0] == 3);
    CHECK(ds.in_degrees[5] == 1);
    CHECK(ds.out_degrees[5] == 0);
}

TEST_CASE("weighted degree sums incident weights") {
    RefGraph g = make_graph(2, {{0, 1, 7}});
    DegreeStats ds = degree_stats(g, true);
    CHECK(ds.out_degrees[0] == 7);
    CHECK(ds.in_degrees[1] == 7);
}

TEST_CASE("gini: equality, point mass, scale invariance") {
    CHECK(gini(std::vector<double>{5, 5, 5, 5}) == doctest::Approx(0.0));
    CHECK(gini(std::vector<double>{0, 0, 0, 1}) == doctest::Approx(0.75));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.1, 9.0);
    std::vector<double> x(40), x10(40);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = unif(rng);
        x10[i] = 10.0 * x[i];
    }
    CHECK(gini(x) == doctest::Approx(gini(x10)).epsilon(1e-12));
    CHECK(gini(x) == doctest::Approx(oracles::naive_gini(x)).epsilon(1e-12));
    CHECK_THROWS_AS(gini(std::vector<double>{0, 0}), analysis_error);
    CHECK_THROWS_AS(gini(std::vector<double>{}), analysis_error);
}

TEST_CASE("clustering: triangle is 1, star is 0") {
    RefGraph tri = make_graph(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
    ClusteringReport r = clustering(tri);
    CHECK(r.global_c == doctest::Approx(1.0));
    REQUIRE(r.local_c);
    CHECK(*r.local_c == doctest::Approx(1.0));

    RefGraph star = make_graph(5, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}});
    ClusteringReport s = clustering(star);
    CHECK(s.global_c == doctest::Approx(0.0));
    REQUIRE(s.local_c);
    CHECK(*s.local_c == doctest::Approx(0.0));
}

TEST_CASE("clustering: local undefined when no node has two neighbors") {
    RefGraph g = make_graph(2, {{0, 1, 1}});
    ClusteringReport r = clustering(g);
    CHECK_FALSE(r.local_c);
}

TEST_CASE("er_expected is mean degree over n-1") {
    RefGraph g = illustrative(); // 8 directed edges, 6 nodes
    ClusteringReport r = clustering(g);
    CHECK(r.er_expected == doctest::Approx((2.0 * 8 / 6) / 5.0));
}

TEST_CASE("clustering matches the adjacency-matrix oracle on random graphs") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        RefGraph g = oracles::random_digraph(80, 500, seed);
        ClusteringReport got = clustering(g);
        NaiveClustering want = naive_clustering(g);
        CHECK(got.global_c == doctest::Approx(want.global_c).epsilon(1e-12));
        REQUIRE(got.local_c);
        CHECK(*got.local_c == doctest::Approx(want.local_c).epsilon(1e-12));
    }
}

TEST_CASE("assortativity agrees with the naive edge-enumeration oracle to 1e-12") {
    RefGraph g = oracles::random_digraph(60, 700, 21);
    DegreeStats ds = degree_stats(g, false);
    AssortativityReport rep = assortativity(g);

    auto oracle = [&](bool src_in, bool dst_in) {
        std::vector<double> x, y;
        for (NodeId u = 0; u < g.node_count(); ++u)
            for (NodeId v : g.out_neighbors(u)) {
                x.push_back(src_in ? ds.in_degrees[u] : ds.out_degrees[u]);
                y.push_back(dst_in ? ds.in_degrees[v] : ds.out_degrees[v]);
            }
        return oracles::naive_pearson(x, y);
    };
    REQUIRE(rep.r_in_in);
    REQUIRE(rep.r_out_out);
    REQUIRE(rep.r_in_out);
    REQUIRE(rep.r_out_in);
    CHECK(*rep.r_in_in == doctest::Approx(oracle(true, true)).epsilon(1e-12));
    CHECK(*rep.r_out_out == doctest::Approx(oracle(false, false)).epsilon(1e-12));
    CHECK(*rep.r_in_out == doctest::Approx(oracle(true, false)).epsilon(1e-12));
    CHECK(*rep.r_out_in == doctest::Approx(oracle(false, true)).epsilon(1e-12));
    CHECK(rep.fisher_se == doctest::Approx(1.0 / std::sqrt(700.0 - 3.0)));
}

TEST_CASE("assortativity undefined on a 2-regular directed cycle") {
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    for (NodeId u = 0; u < 8; ++u) edges.emplace_back(u, (u + 1) % 8, 1);
    RefGraph g = make_graph(8, std::move(edges));
    AssortativityReport rep = assortativity(g);
    CHECK_FALSE(rep.r_in_in);
    CHECK_FALSE(rep.r_out_out);
}

TEST_CASE("assortativity transpose identities") {
    // Reversing every edge swaps in- with out-degree, so (in,in) trades
    // places with (out,out) while the two mixed variants are invariant
    // (each edge pair set merely swaps x with y).
    RefGraph g = oracles::random_digraph(50, 420, 33);
    RefGraph t = g.transpose();
    AssortativityReport a = assortativity(g);
    AssortativityReport b = assortativity(t);
    REQUIRE(a.r_in_out);
    REQUIRE(b.r_in_out);
    CHECK(*a.r_in_in == doctest::Approx(*b.r_out_out).epsilon(1e-12));
    CHECK(*a.r_out_out == doctest::Approx(*b.r_in_in).epsilon(1e-12));
    CHECK(*a.r_in_out == doctest::Approx(*b.r_in_out).epsilon(1e-12));
    CHECK(*a.r_out_in == doctest::Approx(*b.r_out_in).epsilon(1e-12));
}

TEST_CASE("self-degree correlation: exact on identity, oracle on random") {
    // Mutual edges only: in == out at every node.
    RefGraph g = generate_er(40, 0.2, 9);
    auto r = self_degree_correlation(g);
    REQUIRE(r);
    CHECK(*r == doctest::Approx(1.0));

    RefGraph h = oracles::random_digraph(70, 600, 44);
    DegreeStats ds = degree_stats(h, false);
    auto got = self_degree_correlation(h);
    REQUIRE(got);
    std::vector<double> x(ds.in_degrees.begin(), ds.in_degrees.end());
    std::vector<double> y(ds.out_degrees.begin(), ds.out_degrees.end());
    CHECK(*got == doctest::Approx(oracles::naive_pearson(x, y)).epsilon(1e-12));
}

TEST_CASE("reciprocity: perfectly symmetric weights give corr 1") {
    RefGraph g = make_graph(4, {{0, 1, 5}, {1, 0, 5}, {1, 2, 2}, {2, 1, 2}, {2, 3, 9}, {3, 2, 9}});
    ReciprocityReport rep = reciprocity(g);
    REQUIRE(rep.corr);
    CHECK(*rep.corr == doctest::Approx(1.0));
    CHECK(rep.bidirectional_fraction == doctest::Approx(1.0));
    CHECK(rep.mutual_pairs == 3);
}

TEST_CASE("reciprocity: dyad fractions and the symmetrized-pair oracle") {
    RefGraph g = make_graph(5, {{0, 1, 3}, {1, 0, 7}, {0, 2, 2}, {2, 0, 2}, {3, 4, 5}, {0, 3, 1}});
    ReciprocityReport rep = reciprocity(g);
    CHECK(rep.mutual_pairs == 2);
    CHECK(rep.asymmetric_pairs == 2);
    CHECK(rep.bidirectional_fraction == doctest::Approx(0.5));
    // Symmetrized oracle: each mutual pair contributes both orderings.
    std::vector<double> x = {3, 7, 2, 2};
    std::vector<double> y = {7, 3, 2, 2};
    REQUIRE(rep.corr);
    CHECK(*rep.corr == doctest::Approx(oracles::naive_pearson(x, y)).epsilon(1e-12));
    CHECK(rep.r_squared == doctest::Approx(*rep.corr * *rep.corr));
}

TEST_CASE("reciprocity: no mutual dyads means undefined correlation") {
    RefGraph g = make_graph(3, {{0, 1, 1}, {1, 2, 1}});
    ReciprocityReport rep = reciprocity(g);
    CHECK_FALSE(rep.corr);
    CHECK(rep.bidirectional_fraction == doctest::Approx(0.0));
}

TEST_CASE("ER global clustering sits within 3 SE of p across samples") {
    // E[C_g] = p under the ER model; SE taken across independent samples.
    const double p = 0.01;
    const std::size_t n = 2000;
    std::vector<double> cg;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        ClusteringReport r = clustering(generate_er(n, p, seed));
        cg.push_back(r.global_c);
    }
    double m = mean(cg);
    double se = sample_sd(cg) / std::sqrt(static_cast<double>(cg.size()));
    CHECK(std::abs(m - p) <= 3.0 * se);
}
