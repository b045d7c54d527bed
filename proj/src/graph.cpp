#include "refnet/graph.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace refnet {

RefGraph RefGraph::from_sorted_edges(std::size_t node_count,
                                     const std::vector<std::tuple<NodeId, NodeId, Weight>>& edges) {
    RefGraph g;
    g.out_offsets_.assign(node_count + 1, 0);
    g.in_offsets_.assign(node_count + 1, 0);
    for (const auto& [u, v, w] : edges) {
        ++g.out_offsets_[u + 1];
        ++g.in_offsets_[v + 1];
    }
    std::partial_sum(g.out_offsets_.begin(), g.out_offsets_.end(), g.out_offsets_.begin());
    std::partial_sum(g.in_offsets_.begin(), g.in_offsets_.end(), g.in_offsets_.begin());

    g.out_nbr_.resize(edges.size());
    g.out_wt_.resize(edges.size());
    g.in_nbr_.resize(edges.size());
    g.in_wt_.resize(edges.size());

    std::vector<std::uint64_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    std::vector<std::uint64_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (const auto& [u, v, w] : edges) {
        g.out_nbr_[out_pos[u]] = v;
        g.out_wt_[out_pos[u]++] = w;
        g.in_nbr_[in_pos[v]] = u;
        g.in_wt_[in_pos[v]++] = w;
    }
    // Input is sorted by (from,to) so out lists are sorted already; in lists
    // come out sorted too because the scan order is by source.
    return g;
}

Weight RefGraph::edge_weight(NodeId u, NodeId v) const {
    auto nbrs = out_neighbors(u);
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
    if (it == nbrs.end() || *it != v) return 0;
    return out_wt_[out_offsets_[u] + static_cast<std::size_t>(it - nbrs.begin())];
}

std::uint64_t RefGraph::total_weight() const {
    std::uint64_t s = 0;
    for (Weight w : out_wt_) s += w;
    return s;
}

RefGraph RefGraph::transpose() const {
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    edges.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
        auto nbrs = in_neighbors(u);
        auto wts = in_weights(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) edges.emplace_back(u, nbrs[i], wts[i]);
    }
    std::sort(edges.begin(), edges.end());
    return from_sorted_edges(node_count(), edges);
}

std::vector<NodeId> RefGraph::undirected_neighbors(NodeId u) const {
    auto a = out_neighbors(u);
    auto b = in_neighbors(u);
    std::vector<NodeId> merged;
    merged.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
    merged.erase(std::remove(merged.begin(), merged.end(), u), merged.end());
    return merged;
}

ShadowGraph undirected_shadow(const RefGraph& g) {
    const std::size_t n = g.node_count();
    ShadowGraph sh;
    sh.offsets.assign(n + 1, 0);
    std::vector<std::vector<NodeId>> lists(n);
    for (NodeId u = 0; u < n; ++u) lists[u] = g.undirected_neighbors(u);
    for (NodeId u = 0; u < n; ++u) sh.offsets[u + 1] = sh.offsets[u] + lists[u].size();
    sh.nbr.resize(sh.offsets[n]);
    for (NodeId u = 0; u < n; ++u)
        std::copy(lists[u].begin(), lists[u].end(), sh.nbr.begin() + sh.offsets[u]);
    return sh;
}

NodeId PhysicianRegistry::intern(const std::string& npi) {
    auto it = npi_to_node_.find(npi);
    if (it != npi_to_node_.end()) return it->second;
    NodeId id = static_cast<NodeId>(node_to_npi_.size());
    node_to_npi_.push_back(npi);
    npi_to_node_.emplace(npi, id);
    return id;
}

std::optional<NodeId> PhysicianRegistry::find(const std::string& npi) const {
    auto it = npi_to_node_.find(npi);
    if (it == npi_to_node_.end()) return std::nullopt;
    return it->second;
}

void PhysicianRegistry::set_state(NodeId u, StateId s) {
    if (state_of_.size() < node_to_npi_.size()) state_of_.resize(node_to_npi_.size(), kNoState);
    state_of_[u] = s;
}

void GraphBuilder::add(const RawReferralRecord& rec) {
    NodeId u = registry_.intern(rec.from_npi);
    NodeId v = registry_.intern(rec.to_npi);
    edges_.emplace_back(u, v, rec.shared_count);
    ++input_records_;
}

std::pair<RefGraph, PhysicianRegistry> GraphBuilder::finish(BuildStats* stats) {
    std::sort(edges_.begin(), edges_.end(),
              [](const auto& a, const auto& b) {
                  return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                          : std::get<1>(a) < std::get<1>(b);
              });
    // Merge duplicate ordered pairs by weight summation.
    std::uint64_t merged = 0;
    std::size_t w_idx = 0;
    for (std::size_t i = 0; i < edges_.size();) {
        std::size_t j = i + 1;
        Weight sum = std::get<2>(edges_[i]);
        while (j < edges_.size() && std::get<0>(edges_[j]) == std::get<0>(edges_[i]) &&
               std::get<1>(edges_[j]) == std::get<1>(edges_[i])) {
            sum += std::get<2>(edges_[j]);
            ++merged;
            ++j;
        }
        edges_[w_idx++] = {std::get<0>(edges_[i]), std::get<1>(edges_[i]), sum};
        i = j;
    }
    edges_.resize(w_idx);
    if (stats) {
        stats->input_records = input_records_;
        stats->merged_pairs = merged;
    }
    registry_.ensure_state_size(registry_.size());
    RefGraph g = RefGraph::from_sorted_edges(registry_.size(), edges_);
    edges_.clear();
    edges_.shrink_to_fit();
    return {std::move(g), std::move(registry_)};
}

std::pair<RefGraph, PhysicianRegistry> build_graph(const std::vector<RawReferralRecord>& records,
                                                   BuildStats* stats) {
    GraphBuilder b;
    for (const auto& r : records) b.add(r);
    return b.finish(stats);
}

StateAssignmentReport assign_states(PhysicianRegistry& registry, const RefGraph& graph,
                                    const std::vector<NpiStateRecord>& npi_records,
                                    bool weighted) {
    const std::size_t n = graph.node_count();
    registry.ensure_state_size(n);
    StateAssignmentReport rep;

    // Candidate state sets per node, sorted by state code (lexicographic
    // order of codes == id order in the embedded table).
    std::vector<std::vector<StateId>> candidates(n);
    for (const auto& rec : npi_records) {
        auto node = registry.find(rec.npi);
        if (!node) continue; // physician with no edges this year
        auto sid = state_id(rec.state);
        if (!sid) continue;
        auto& c = candidates[*node];
        if (std::find(c.begin(), c.end(), *sid) == c.end()) c.push_back(*sid);
    }
    for (auto& c : candidates) std::sort(c.begin(), c.end());

    std::vector<StateId> label(n, kNoState);
    std::vector<NodeId> pending;
    for (NodeId u = 0; u < n; ++u) {
        if (candidates[u].empty()) {
            ++rep.unlabeled;
        } else if (candidates[u].size() == 1) {
            label[u] = candidates[u][0];
            ++rep.single_state;
        } else {
            pending.push_back(u);
            ++rep.multi_state;
        }
    }

    auto adjacent_score = [&](NodeId u, const std::vector<StateId>& lab,
                              std::vector<double>& score, const std::vector<StateId>& cand) {
        std::fill(score.begin(), score.end(), 0.0);
        auto tally = [&](NodeId v, Weight w) {
            StateId s = lab[v];
            if (s == kNoState) return;
            for (std::size_t k = 0; k < cand.size(); ++k)
                if (cand[k] == s) score[k] += weighted ? static_cast<double>(w) : 1.0;
        };
        auto on = graph.out_neighbors(u);
        auto ow = graph.out_weights(u);
        for (std::size_t i = 0; i < on.size(); ++i) tally(on[i], ow[i]);
        auto in = graph.in_neighbors(u);
        auto iw = graph.in_weights(u);
        for (std::size_t i = 0; i < in.size(); ++i) tally(in[i], iw[i]);
    };

    // Synchronous rounds: each round scores every still-pending node against
    // the labels fixed in earlier rounds, so the result does not depend on
    // iteration order within a round.
    std::vector<double> score;
    while (!pending.empty()) {
        ++rep.rounds;
        std::vector<std::pair<NodeId, StateId>> decided;
        std::vector<NodeId> still_pending;
        for (NodeId u : pending) {
            const auto& cand = candidates[u];
            score.assign(cand.size(), 0.0);
            adjacent_score(u, label, score, cand);
            double best = *std::max_element(score.begin(), score.end());
            if (best <= 0.0) {
                still_pending.push_back(u);
                continue;
            }
            std::size_t arg = 0;
            bool tie = false;
            for (std::size_t k = 1; k < score.size(); ++k) {
                if (score[k] > score[arg]) {
                    arg = k;
                    tie = false;
                } else if (score[k] == score[arg]) {
                    tie = true; // candidates sorted, keep the smaller code
                }
            }
            if (tie) ++rep.ties;
            decided.emplace_back(u, cand[arg]);
        }
        if (decided.empty()) break;
        for (auto [u, s] : decided) label[u] = s;
        pending = std::move(still_pending);
    }

    // Fallback for nodes whose neighborhoods never acquired labels: referral
    // volume toward neighbors *listed* under each candidate state.
    for (NodeId u : pending) {
        const auto& cand = candidates[u];
        score.assign(cand.size(), 0.0);
        auto tally = [&](NodeId v, Weight w) {
            for (StateId s : candidates[v])
                for (std::size_t k = 0; k < cand.size(); ++k)
                    if (cand[k] == s) score[k] += weighted ? static_cast<double>(w) : 1.0;
        };
        auto on = graph.out_neighbors(u);
        auto ow = graph.out_weights(u);
        for (std::size_t i = 0; i < on.size(); ++i) tally(on[i], ow[i]);
        auto in = graph.in_neighbors(u);
        auto iw = graph.in_weights(u);
        for (std::size_t i = 0; i < in.size(); ++i) tally(in[i], iw[i]);
        std::size_t arg = 0;
        bool tie = score.size() > 1;
        for (std::size_t k = 1; k < score.size(); ++k) {
            if (score[k] > score[arg]) {
                arg = k;
                tie = false;
            } else if (score[k] == score[arg] && score[arg] > 0) {
                tie = true;
            }
        }
        if (tie || score[arg] == 0.0) ++rep.ties;
        label[u] = cand[arg];
    }

    for (NodeId u = 0; u < n; ++u) registry.set_state(u, label[u]);
    return rep;
}

SubnetworkKind SubnetworkKind::parse(const std::string& text) {
    if (text == "national") return national();
    auto colon = text.find(':');
    if (colon != std::string::npos) {
        std::string head = text.substr(0, colon);
        std::string code = text.substr(colon + 1);
        if (!is_known_state(code)) throw input_error("unknown state code: " + code);
        if (head == "induced") return induced(code);
        if (head == "intrastate") return intrastate(code);
    }
    throw input_error("bad subnetwork spec: " + text +
                      " (expected national | induced:XX | intrastate:XX)");
}

std::string SubnetworkKind::to_string() const {
    switch (level) {
        case Level::National: return "national";
        case Level::InducedState: return "induced:" + state;
        case Level::Intrastate: return "intrastate:" + state;
    }
    return "?";
}

Subnetwork extract_subnetwork(const RefGraph& graph, const PhysicianRegistry& registry,
                              const SubnetworkKind& kind) {
    const std::size_t n = graph.node_count();
    if (kind.level == SubnetworkKind::Level::National) {
        Subnetwork sub;
        sub.to_parent.resize(n);
        std::iota(sub.to_parent.begin(), sub.to_parent.end(), NodeId{0});
        std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
        edges.reserve(graph.edge_count());
        for (NodeId u = 0; u < n; ++u) {
            auto nbrs = graph.out_neighbors(u);
            auto wts = graph.out_weights(u);
            for (std::size_t i = 0; i < nbrs.size(); ++i) edges.emplace_back(u, nbrs[i], wts[i]);
        }
        sub.graph = RefGraph::from_sorted_edges(n, edges);
        return sub;
    }

    auto sid = state_id(kind.state);
    if (!sid || !is_known_state(kind.state)) throw input_error("unknown state code: " + kind.state);
    const bool intrastate = kind.level == SubnetworkKind::Level::Intrastate;

    std::vector<bool> keep(n, false);
    if (intrastate) {
        // Node set: every physician labeled S; edge set: both endpoints S.
        for (NodeId u = 0; u < n; ++u)
            if (registry.state_of(u) == *sid) keep[u] = true;
    } else {
        // Node set: endpoints of edges touching S.
        for (NodeId u = 0; u < n; ++u) {
            bool u_in = registry.state_of(u) == *sid;
            auto nbrs = graph.out_neighbors(u);
            for (NodeId v : nbrs) {
                if (u_in || registry.state_of(v) == *sid) {
                    keep[u] = true;
                    keep[v] = true;
                }
            }
        }
    }

    Subnetwork sub;
    std::vector<NodeId> remap(n, kInvalidNode);
    for (NodeId u = 0; u < n; ++u) {
        if (keep[u]) {
            remap[u] = static_cast<NodeId>(sub.to_parent.size());
            sub.to_parent.push_back(u);
        }
    }
    std::vector<std::tuple<NodeId, NodeId, Weight>> edges;
    for (NodeId u = 0; u < n; ++u) {
        if (!keep[u]) continue;
        bool u_in = registry.state_of(u) == *sid;
        auto nbrs = graph.out_neighbors(u);
        auto wts = graph.out_weights(u);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            NodeId v = nbrs[i];
            bool v_in = registry.state_of(v) == *sid;
            bool take = intrastate ? (u_in && v_in) : (u_in || v_in);
            if (take) edges.emplace_back(remap[u], remap[v], wts[i]);
        }
    }
    sub.graph = RefGraph::from_sorted_edges(sub.to_parent.size(), edges);
    return sub;
}

std::vector<std::vector<NodeId>> weak_components(const ShadowGraph& shadow) {
    const std::size_t n = shadow.node_count();
    std::vector<std::vector<NodeId>> comps;
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<NodeId> comp;
        stack.push_back(s);
        seen[s] = true;
        while (!stack.empty()) {
            NodeId u = stack.back();
            stack.pop_back();
            comp.push_back(u);
            for (NodeId v : shadow.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    std::stable_sort(comps.begin(), comps.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return comps;
}

std::vector<std::vector<NodeId>> weak_components(const RefGraph& graph) {
    return weak_components(undirected_shadow(graph));
}

namespace {

// BFS eccentricity on the shadow; returns (farthest node, distance).
std::pair<NodeId, int> bfs_ecc(const ShadowGraph& sh, NodeId start, std::vector<int>& dist) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<NodeId> q;
    dist[start] = 0;
    q.push_back(start);
    NodeId far = start;
    int ecc = 0;
    while (!q.empty()) {
        NodeId u = q.front();
        q.pop_front();
        for (NodeId v : sh.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                if (dist[v] > ecc || (dist[v] == ecc && v < far)) {
                    ecc = dist[v];
                    far = v;
                }
                q.push_back(v);
            }
        }
    }
    return {far, ecc};
}

} // namespace

int approx_diameter(const ShadowGraph& shadow, std::size_t sample_size, std::uint64_t seed) {
    const std::size_t n = shadow.node_count();
    if (n == 0) throw analysis_error("approx_diameter: empty graph");
    if (n == 1) return 0;

    std::vector<NodeId> starts;
    if (sample_size >= n) {
        starts.resize(n);
        std::iota(starts.begin(), starts.end(), NodeId{0});
    } else {
        // Sample distinct starts with a seeded partial Fisher-Yates.
        std::vector<NodeId> pool(n);
        std::iota(pool.begin(), pool.end(), NodeId{0});
        auto rng = make_stream(seed, 0);
        for (std::size_t i = 0; i < sample_size; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, n - 1);
            std::swap(pool[i], pool[pick(rng)]);
            starts.push_back(pool[i]);
        }
    }

    const bool exact = sample_size >= n;
    std::vector<int> best(starts.size(), 0);
    parallel_blocks(starts.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
        std::vector<int> dist(n);
        for (std::size_t i = lo; i < hi; ++i) {
            auto [far, ecc] = bfs_ecc(shadow, starts[i], dist);
            int found = ecc;
            if (!exact) {
                // Double sweep: the second BFS from the farthest node usually
                // tightens the bound.
                auto [far2, ecc2] = bfs_ecc(shadow, far, dist);
                (void)far2;
                found = std::max(found, ecc2);
            }
            best[i] = found;
        }
    });
    return *std::max_element(best.begin(), best.end());
}

int approx_diameter(const RefGraph& graph, std::size_t sample_size, std::uint64_t seed) {
    return approx_diameter(undirected_shadow(graph), sample_size, seed);
}

namespace {

constexpr char kCacheMagic[8] = {'R', 'F', 'N', 'E', 'T', 'G', '0', '1'};

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
    std::uint64_t len = v.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(len * sizeof(T)));
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v) {
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    v.resize(len);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(len * sizeof(T)));
}

} // namespace

void save_graph_cache(const std::string& path, const RefGraph& g, const PhysicianRegistry& reg) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw input_error("cannot write graph cache: " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    std::uint64_t n = g.node_count();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    write_vec(out, g.out_offsets_);
    write_vec(out, g.out_nbr_);
    write_vec(out, g.out_wt_);
    write_vec(out, g.in_offsets_);
    write_vec(out, g.in_nbr_);
    write_vec(out, g.in_wt_);
    // NPI table: all ids are 10 bytes; states as raw int16.
    std::uint64_t nn = reg.node_to_npi_.size();
    out.write(reinterpret_cast<const char*>(&nn), sizeof(nn));
    for (const auto& npi : reg.node_to_npi_) {
        std::uint8_t len = static_cast<std::uint8_t>(npi.size());
        out.write(reinterpret_cast<const char*>(&len), 1);
        out.write(npi.data(), len);
    }
    write_vec(out, reg.state_of_);
    if (!out) throw input_error("short write on graph cache: " + path);
}

void load_graph_cache(const std::string& path, RefGraph& g, PhysicianRegistry& reg) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open graph cache: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw input_error("not a refnet graph cache (bad magic): " + path);
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    read_vec(in, g.out_offsets_);
    read_vec(in, g.out_nbr_);
    read_vec(in, g.out_wt_);
    read_vec(in, g.in_offsets_);
    read_vec(in, g.in_nbr_);
    read_vec(in, g.in_wt_);
    std::uint64_t nn = 0;
    in.read(reinterpret_cast<char*>(&nn), sizeof(nn));
    reg.node_to_npi_.clear();
    reg.npi_to_node_.clear();
    reg.node_to_npi_.reserve(nn);
    for (std::uint64_t i = 0; i < nn; ++i) {
        std::uint8_t len = 0;
        in.read(reinterpret_cast<char*>(&len), 1);
        std::string npi(len, '\0');
        in.read(npi.data(), len);
        reg.npi_to_node_.emplace(npi, static_cast<NodeId>(i));
        reg.node_to_npi_.push_back(std::move(npi));
    }
    read_vec(in, reg.state_of_);
    if (!in || g.out_offsets_.size() != n + 1)
        throw input_error("truncated graph cache: " + path);
}

} // namespace refnet
