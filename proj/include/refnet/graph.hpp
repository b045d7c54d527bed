#ifndef REFNET_GRAPH_HPP
#define REFNET_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "refnet/common.hpp"
#include "refnet/ingest.hpp"
#include "refnet/states.hpp"

namespace refnet {

// Immutable directed weighted graph in dual CSR form. Neighbor lists are
// sorted by node id with parallel records merged, so edge lookup is a
// binary search in either direction.
class RefGraph {
public:
    RefGraph() : out_offsets_(1, 0), in_offsets_(1, 0) {}

    // Takes a merged edge list sorted by (from, to) with no duplicates.
    static RefGraph from_sorted_edges(std::size_t node_count,
                                      const std::vector<std::tuple<NodeId, NodeId, Weight>>& edges);

    std::size_t node_count() const { return out_offsets_.size() - 1; }
    std::uint64_t edge_count() const { return out_nbr_.size(); }

    std::span<const NodeId> out_neighbors(NodeId u) const {
        return {out_nbr_.data() + out_offsets_[u], out_nbr_.data() + out_offsets_[u + 1]};
    }
    std::span<const Weight> out_weights(NodeId u) const {
        return {out_wt_.data() + out_offsets_[u], out_wt_.data() + out_offsets_[u + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId u) const {
        return {in_nbr_.data() + in_offsets_[u], in_nbr_.data() + in_offsets_[u + 1]};
    }
    std::span<const Weight> in_weights(NodeId u) const {
        return {in_wt_.data() + in_offsets_[u], in_wt_.data() + in_offsets_[u + 1]};
    }

    std::size_t out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
    std::size_t in_degree(NodeId u) const { return in_offsets_[u + 1] - in_offsets_[u]; }

    bool has_edge(NodeId u, NodeId v) const { return edge_weight(u, v) != 0; }
    Weight edge_weight(NodeId u, NodeId v) const; // 0 when the edge is absent

    std::uint64_t total_weight() const;
    RefGraph transpose() const;

    // Sorted unique union of in- and out-neighbors, self excluded.
    std::vector<NodeId> undirected_neighbors(NodeId u) const;

private:
    std::vector<std::uint64_t> out_offsets_, in_offsets_;
    std::vector<NodeId> out_nbr_, in_nbr_;
    std::vector<Weight> out_wt_, in_wt_;

    friend void save_graph_cache(const std::string&, const RefGraph&, const class PhysicianRegistry&);
    friend void load_graph_cache(const std::string&, RefGraph&, class PhysicianRegistry&);
};

// Undirected simple shadow of a digraph: any directed edge becomes one
// undirected edge. Built once and reused by clustering, components and BFS.
struct ShadowGraph {
    std::vector<std::uint64_t> offsets; // size n+1
    std::vector<NodeId> nbr;            // sorted per node

    std::size_t node_count() const { return offsets.size() - 1; }
    std::uint64_t edge_count() const { return nbr.size() / 2; }
    std::span<const NodeId> neighbors(NodeId u) const {
        return {nbr.data() + offsets[u], nbr.data() + offsets[u + 1]};
    }
    std::size_t degree(NodeId u) const { return offsets[u + 1] - offsets[u]; }
};

ShadowGraph undirected_shadow(const RefGraph& g);

// NPI <-> dense node index, plus the per-physician state label.
class PhysicianRegistry {
public:
    NodeId intern(const std::string& npi);
    std::optional<NodeId> find(const std::string& npi) const;
    const std::string& npi_of(NodeId u) const { return node_to_npi_[u]; }
    std::size_t size() const { return node_to_npi_.size(); }

    StateId state_of(NodeId u) const { return u < state_of_.size() ? state_of_[u] : kNoState; }
    void set_state(NodeId u, StateId s);
    void ensure_state_size(std::size_t n) { state_of_.resize(n, kNoState); }

    const std::vector<std::string>& npi_table() const { return node_to_npi_; }

private:
    std::vector<std::string> node_to_npi_;
    std::unordered_map<std::string, NodeId> npi_to_node_;
    std::vector<StateId> state_of_;

    friend void save_graph_cache(const std::string&, const RefGraph&, const PhysicianRegistry&);
    friend void load_graph_cache(const std::string&, RefGraph&, PhysicianRegistry&);
};

struct BuildStats {
    std::uint64_t input_records = 0;
    std::uint64_t merged_pairs = 0; // duplicate (from,to) records folded
};

// Streaming builder: feed records, then finish() once.
class GraphBuilder {
public:
    void add(const RawReferralRecord& rec);
    std::pair<RefGraph, PhysicianRegistry> finish(BuildStats* stats = nullptr);

private:
    PhysicianRegistry registry_;
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges_;
    std::uint64_t input_records_ = 0;
};

std::pair<RefGraph, PhysicianRegistry> build_graph(const std::vector<RawReferralRecord>& records,
                                                   BuildStats* stats = nullptr);

struct StateAssignmentReport {
    std::uint64_t single_state = 0;   // labeled in pass 1
    std::uint64_t multi_state = 0;    // needed the most-referrals rule
    std::uint64_t ties = 0;           // broken lexicographically
    std::uint64_t unlabeled = 0;      // nodes with edges but no NPI-state row
    std::uint64_t rounds = 0;         // label-propagation rounds used
};

// Most-referrals rule. Pass 1 labels physicians listed under one state.
// Pass 2 scores each candidate state by adjacent referral weight to/from
// already-labeled counterparties, in synchronous rounds; candidates with no
// labeled neighbor fall back to referral volume toward neighbors listed
// under the candidate state. Ties break to the lexicographically smaller
// code. Deterministic.
StateAssignmentReport assign_states(PhysicianRegistry& registry, const RefGraph& graph,
                                    const std::vector<NpiStateRecord>& npi_records,
                                    bool weighted = true);

struct SubnetworkKind {
    enum class Level { National, InducedState, Intrastate };
    Level level = Level::National;
    std::string state; // empty for National

    static SubnetworkKind national() { return {Level::National, ""}; }
    static SubnetworkKind induced(std::string code) { return {Level::InducedState, std::move(code)}; }
    static SubnetworkKind intrastate(std::string code) { return {Level::Intrastate, std::move(code)}; }
    static SubnetworkKind parse(const std::string& text); // "national" | "induced:NH" | "intrastate:NH"
    std::string to_string() const;
};

struct Subnetwork {
    RefGraph graph;
    std::vector<NodeId> to_parent; // sub node -> parent node
};

Subnetwork extract_subnetwork(const RefGraph& graph, const PhysicianRegistry& registry,
                              const SubnetworkKind& kind);

// Weakly connected components, largest first.
std::vector<std::vector<NodeId>> weak_components(const RefGraph& graph);
std::vector<std::vector<NodeId>> weak_components(const ShadowGraph& shadow);

// Sampled double-sweep BFS lower bound on the undirected diameter.
// Exact (all starts swept) when sample_size >= node_count.
int approx_diameter(const RefGraph& graph, std::size_t sample_size, std::uint64_t seed);
int approx_diameter(const ShadowGraph& shadow, std::size_t sample_size, std::uint64_t seed);

// Versioned binary cache with both adjacency arrays and the NPI table.
void save_graph_cache(const std::string& path, const RefGraph& g, const PhysicianRegistry& reg);
void load_graph_cache(const std::string& path, RefGraph& g, PhysicianRegistry& reg);

} // namespace refnet

#endif
