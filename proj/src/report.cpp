#include "refnet/report.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "refnet/gravity.hpp"
#include "refnet/metrics.hpp"
#include "refnet/motifs.hpp"
#include "refnet/nullmodels.hpp"
#include "refnet/powerlaw.hpp"
#include "refnet/stats.hpp"

namespace refnet {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string RunManifest::digest() const {
    Fnv1a h;
    h.update(config_snapshot);
    for (const auto& [k, v] : input_digests) {
        h.update(k);
        h.update(v);
    }
    h.update(&seed, sizeof(seed));
    h.update(version);
    return h.hex();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw input_error("cannot write " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw input_error("short write on " + tmp);
    }
    fs::rename(tmp, path);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Frame {
    double x0 = 60, y0 = 20, w = 420, h = 320;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin + 1e-300) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin + 1e-300) * h; }
};

void svg_header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"400\" "
          "viewBox=\"0 0 520 400\">\n";
    os << "<text x=\"260\" y=\"14\" text-anchor=\"middle\" font-size=\"13\">" << title
       << "</text>\n";
}

} // namespace

std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::string>& labels, const std::string& title,
                        bool log_log) {
    std::ostringstream os;
    svg_header(os, title);
    if (!x.empty()) {
        std::vector<double> tx(x), ty(y);
        if (log_log) {
            for (double& v : tx) v = std::log10(std::max(v, 1e-12));
            for (double& v : ty) v = std::log10(std::max(v, 1e-12));
        }
        Frame f;
        f.xmin = *std::min_element(tx.begin(), tx.end());
        f.xmax = *std::max_element(tx.begin(), tx.end());
        f.ymin = *std::min_element(ty.begin(), ty.end());
        f.ymax = *std::max_element(ty.begin(), ty.end());
        os << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\""
           << f.h << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (std::size_t i = 0; i < tx.size(); ++i) {
            os << "<circle cx=\"" << fmt(f.px(tx[i])) << "\" cy=\"" << fmt(f.py(ty[i]))
               << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
            if (i < labels.size() && !labels[i].empty())
                os << "<text x=\"" << fmt(f.px(tx[i]) + 4) << "\" y=\"" << fmt(f.py(ty[i]) - 3)
                   << "\" font-size=\"9\">" << labels[i] << "</text>\n";
        }
        os << "<text x=\"60\" y=\"392\" font-size=\"10\">x range [" << fmt(f.xmin) << ", "
           << fmt(f.xmax) << "]" << (log_log ? " (log10)" : "") << "; y range [" << fmt(f.ymin)
           << ", " << fmt(f.ymax) << "]</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_histogram(const std::vector<double>& values, std::size_t bins,
                          const std::string& title) {
    std::ostringstream os;
    svg_header(os, title);
    if (!values.empty() && bins > 0) {
        double lo = *std::min_element(values.begin(), values.end());
        double hi = *std::max_element(values.begin(), values.end());
        if (hi <= lo) hi = lo + 1.0;
        std::vector<std::size_t> counts(bins, 0);
        for (double v : values) {
            auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
            ++counts[std::min(b, bins - 1)];
        }
        std::size_t cmax = *std::max_element(counts.begin(), counts.end());
        Frame f;
        os << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\""
           << f.h << "\" fill=\"none\" stroke=\"black\"/>\n";
        double bw = f.w / static_cast<double>(bins);
        for (std::size_t b = 0; b < bins; ++b) {
            double bh = cmax ? f.h * static_cast<double>(counts[b]) / static_cast<double>(cmax) : 0;
            os << "<rect x=\"" << fmt(f.x0 + bw * static_cast<double>(b)) << "\" y=\""
               << fmt(f.y0 + f.h - bh) << "\" width=\"" << fmt(bw - 1) << "\" height=\"" << fmt(bh)
               << "\" fill=\"steelblue\"/>\n";
        }
        os << "<text x=\"60\" y=\"392\" font-size=\"10\">range [" << fmt(lo) << ", " << fmt(hi)
           << "], n=" << values.size() << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw input_error("bad config JSON in " + path + ": " + e.what());
    }
    PipelineConfig c;
    c.referrals = j.value("referrals", "");
    c.npi_states = j.value("npi_states", "");
    c.attributes = j.value("attributes", "");
    c.year = j.value("year", 0);
    c.format = j.value("format", "from,to,count");
    c.seed = j.value("seed", 0ULL);
    c.out_dir = j.value("out", "");
    for (const auto& a : j.value("analyses", json::array())) c.analyses.push_back(a);
    for (const auto& s : j.value("states", json::array())) c.states.push_back(s);
    c.powerlaw_bootstrap = j.value("powerlaw_bootstrap", 200ULL);
    c.powerlaw_direction = j.value("powerlaw_direction", "in");
    c.triad_samples = j.value("triad_samples", 1000000ULL);
    c.cp_sweeps = j.value("cp_sweeps", 10000ULL);
    c.diameter_samples = j.value("diameter_samples", std::size_t{64});
    c.kmeans_k = j.value("kmeans_k", std::size_t{2});
    return c;
}

std::string PipelineConfig::to_canonical_json() const {
    json j;
    j["referrals"] = referrals;
    j["npi_states"] = npi_states;
    j["attributes"] = attributes;
    j["year"] = year;
    j["format"] = format;
    j["seed"] = seed;
    j["analyses"] = analyses;
    j["states"] = states;
    j["powerlaw_bootstrap"] = powerlaw_bootstrap;
    j["powerlaw_direction"] = powerlaw_direction;
    j["triad_samples"] = triad_samples;
    j["cp_sweeps"] = cp_sweeps;
    j["diameter_samples"] = diameter_samples;
    j["kmeans_k"] = kmeans_k;
    return j.dump(); // nlohmann emits object keys sorted: canonical
}

std::string table_triad_census(const std::array<double, 16>& counts,
                               const std::array<double, 16>& std_errors,
                               std::uint64_t n_samples) {
    std::ostringstream os;
    os << "class";
    for (int k = 1; k <= 16; ++k) os << ",T" << k;
    os << "\ncount";
    for (int k = 0; k < 16; ++k) os << "," << fmt(counts[static_cast<std::size_t>(k)]);
    os << "\nstd_error";
    for (int k = 0; k < 16; ++k) os << "," << fmt(std_errors[static_cast<std::size_t>(k)]);
    os << "\nn_samples," << n_samples << ",,,,,,,,,,,,,,,\n";
    return os.str();
}

std::string table_features(const std::vector<StateFeatureVector>& rows) {
    std::ostringstream os;
    os << "state,year";
    for (std::size_t k = 1; k <= kFeatureCount; ++k) os << ",f" << k;
    os << "\n";
    for (const auto& r : rows) {
        os << r.state << "," << r.year;
        for (std::size_t k = 1; k <= kFeatureCount; ++k) {
            os << ",";
            if (auto v = r.get(k)) os << fmt(*v);
            else os << "NA";
        }
        os << "\n";
    }
    return os.str();
}

std::string table_powerlaw_pvalues(const std::vector<int>& years,
                                   const std::map<std::string, std::vector<double>>& by_state) {
    std::ostringstream os;
    os << "state";
    for (int y : years) os << "," << y;
    os << "\n";
    for (const auto& [state, ps] : by_state) {
        os << state;
        for (double p : ps) os << "," << fmt(p);
        os << "\n";
    }
    return os.str();
}

namespace {

long peak_rss_kb() {
    struct rusage ru{};
    getrusage(RUSAGE_SELF, &ru);
    return ru.ru_maxrss;
}

struct ArtifactWriter {
    fs::path dir;
    std::string manifest_digest;
    std::vector<std::string> written;

    void write_json(const std::string& name, json j) {
        j["manifest_digest"] = manifest_digest;
        write_file_atomic((dir / name).string(), j.dump(2) + "\n");
        written.push_back(name);
    }
    void write_csv(const std::string& name, const std::string& body) {
        write_file_atomic((dir / name).string(), "# manifest=" + manifest_digest + "\n" + body);
        written.push_back(name);
    }
    void write_svg(const std::string& name, const std::string& body) {
        write_file_atomic((dir / name).string(),
                          "<!-- manifest=" + manifest_digest + " -->\n" + body);
        written.push_back(name);
    }
};

json metrics_to_json(const RefGraph& g) {
    json j;
    j["nodes"] = g.node_count();
    j["edges"] = g.edge_count();
    j["total_weight"] = g.total_weight();
    DegreeStats ds = degree_stats(g, false);
    j["mean_degree"] = ds.mean_degree; // f1 convention: 2*edges/nodes
    ClusteringReport cl = clustering(g);
    j["global_clustering"] = cl.global_c;
    if (cl.local_c) j["local_clustering"] = *cl.local_c;
    else j["local_clustering"] = nullptr;
    j["er_expected_clustering"] = cl.er_expected;
    j["triangles"] = cl.triangles;
    AssortativityReport ar = assortativity(g);
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j["assortativity"] = {{"in_in", opt(ar.r_in_in)},
                          {"out_out", opt(ar.r_out_out)},
                          {"in_out", opt(ar.r_in_out)},
                          {"out_in", opt(ar.r_out_in)},
                          {"fisher_se", ar.fisher_se}};
    j["undirected_assortativity"] = opt(undirected_assortativity(g));
    j["self_degree_correlation"] = opt(self_degree_correlation(g));
    ReciprocityReport rc = reciprocity(g);
    j["reciprocity"] = {{"correlation", opt(rc.corr)},
                        {"r_squared", rc.corr ? json(rc.r_squared) : json(nullptr)},
                        {"bidirectional_fraction", rc.bidirectional_fraction},
                        {"mutual_pairs", rc.mutual_pairs},
                        {"asymmetric_pairs", rc.asymmetric_pairs}};
    try {
        std::vector<double> in_nonzero;
        Weight dummy = 0;
        (void)dummy;
        j["gini_in_degree"] = gini(ds.in_degrees);
        j["gini_out_degree"] = gini(ds.out_degrees);
        (void)in_nonzero;
    } catch (const analysis_error&) {
        j["gini_in_degree"] = nullptr;
        j["gini_out_degree"] = nullptr;
    }
    return j;
}

// CCDF points of a positive-integer sample, for the log-log plot.
std::pair<std::vector<double>, std::vector<double>> ccdf_points(const std::vector<double>& vals) {
    std::vector<double> v;
    for (double x : vals)
        if (x > 0) v.push_back(x);
    std::sort(v.begin(), v.end());
    std::vector<double> xs, ys;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        xs.push_back(v[i]);
        ys.push_back(static_cast<double>(v.size() - i) / static_cast<double>(v.size()));
        i = j;
    }
    return {xs, ys};
}

} // namespace

PipelineOutcome run_pipeline(const PipelineConfig& cfg, const std::string& command_line) {
    PipelineOutcome outcome;
    auto t_start = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.command_line = command_line;
    manifest.config_snapshot = cfg.to_canonical_json();
    manifest.seed = cfg.seed;

    if (cfg.out_dir.empty()) throw input_error("pipeline: no output directory configured");
    fs::create_directories(cfg.out_dir);

    // Input digests first; unreadable inputs are input errors (exit 1).
    manifest.input_digests["referrals"] = file_digest_hex(cfg.referrals);
    if (!cfg.npi_states.empty())
        manifest.input_digests["npi_states"] = file_digest_hex(cfg.npi_states);
    if (!cfg.attributes.empty())
        manifest.input_digests["attributes"] = file_digest_hex(cfg.attributes);

    ArtifactWriter w;
    w.dir = cfg.out_dir;
    w.manifest_digest = manifest.digest();

    // Stage 1: ingest + graph.
    FormatSpec spec = FormatSpec::parse(cfg.format);
    GraphBuilder builder;
    IngestReport ing = parse_referrals(cfg.referrals, spec, cfg.year,
                                       [&](const RawReferralRecord& r) { builder.add(r); });
    BuildStats bstats;
    auto [graph, registry] = builder.finish(&bstats);

    StateAssignmentReport assign_rep;
    if (!cfg.npi_states.empty()) {
        auto npi_records = parse_npi_states(cfg.npi_states, cfg.year);
        assign_rep = assign_states(registry, graph, npi_records);
    }
    {
        json j;
        j["rows"] = ing.total_rows;
        j["emitted"] = ing.emitted;
        j["malformed"] = ing.malformed;
        j["self_loops"] = ing.self_loops;
        j["merged_duplicate_pairs"] = bstats.merged_pairs;
        j["nodes"] = graph.node_count();
        j["edges"] = graph.edge_count();
        j["state_assignment"] = {{"single_state", assign_rep.single_state},
                                 {"multi_state", assign_rep.multi_state},
                                 {"ties", assign_rep.ties},
                                 {"unlabeled", assign_rep.unlabeled},
                                 {"rounds", assign_rep.rounds}};
        w.write_json("ingest_report.json", j);
    }

    auto wants = [&](const std::string& name) {
        return std::find(cfg.analyses.begin(), cfg.analyses.end(), name) != cfg.analyses.end();
    };
    auto guard = [&](const std::string& name, const std::function<void()>& fn) {
        if (!wants(name)) return;
        try {
            fn();
        } catch (const std::exception& e) {
            outcome.failures.emplace_back(name, e.what());
        }
    };

    std::vector<std::string> state_list = cfg.states;
    if (state_list.empty()) {
        std::set<std::string> seen;
        for (NodeId u = 0; u < graph.node_count(); ++u) {
            StateId s = registry.state_of(u);
            if (is_core_state(s)) seen.insert(state_code(s));
        }
        state_list.assign(seen.begin(), seen.end());
    }

    guard("metrics", [&] {
        json j = metrics_to_json(graph);
        DyadCensus dc = dyad_census(graph);
        j["dyad_census"] = {{"null", dc.null_pairs}, {"asymmetric", dc.asymmetric}, {"mutual", dc.mutual}};
        w.write_json("metrics.json", j);
    });

    guard("smallworld", [&] {
        SmallWorldThresholds th;
        th.diameter_samples = cfg.diameter_samples;
        th.seed = cfg.seed;
        SmallWorldVerdict v = small_world_test(graph, th);
        json j;
        j["local_clustering"] = v.local_c;
        j["er_expected"] = v.er_expected;
        j["clustering_ratio"] = v.clustering_ratio;
        j["diameter_bound"] = v.diameter_bound;
        j["er_path_scale"] = v.er_path_scale;
        j["is_small_world"] = v.is_small_world;
        j["restricted_to_dominant_component"] = v.restricted_to_dominant_component;
        j["dominant_coverage"] = v.dominant_coverage;
        w.write_json("smallworld.json", j);
    });

    guard("powerlaw", [&] {
        DegreeStats ds = degree_stats(graph, false);
        const auto& deg = cfg.powerlaw_direction == "out" ? ds.out_degrees : ds.in_degrees;
        std::vector<std::uint64_t> positive;
        for (double v : deg)
            if (v > 0) positive.push_back(static_cast<std::uint64_t>(v));
        PowerLawFit fit = fit_powerlaw(positive);
        GofResult gof = gof_pvalue(positive, fit, cfg.powerlaw_bootstrap, cfg.seed);
        json j;
        j["direction"] = cfg.powerlaw_direction;
        j["alpha"] = fit.alpha;
        j["xmin"] = fit.xmin;
        j["n_tail"] = fit.n_tail;
        j["ks_stat"] = fit.ks_stat;
        j["p_value"] = gof.p_value;
        j["n_bootstrap"] = gof.n_bootstrap;
        j["seed"] = gof.seed;
        w.write_json("powerlaw.json", j);

        auto [xs, ys] = ccdf_points(deg);
        std::ostringstream csv;
        csv << "degree,ccdf\n";
        for (std::size_t i = 0; i < xs.size(); ++i) csv << xs[i] << "," << ys[i] << "\n";
        w.write_csv("powerlaw_ccdf.csv", csv.str());
        w.write_svg("powerlaw_ccdf.svg",
                    svg_scatter(xs, ys, {}, "log-log CCDF (" + cfg.powerlaw_direction + "-degree)",
                                true));
    });

    guard("triads", [&] {
        TriadCensus census = triad_census_mc(graph, cfg.triad_samples, cfg.seed);
        json j;
        j["n_samples"] = census.n_samples;
        j["seed"] = census.seed;
        for (int k = 0; k < 16; ++k) {
            j["tallies"]["T" + std::to_string(k + 1)] = census.tallies[static_cast<std::size_t>(k)];
            j["scaled_counts"]["T" + std::to_string(k + 1)] = census.counts[static_cast<std::size_t>(k)];
        }
        w.write_json("triads.json", j);
        w.write_csv("triads.csv", table_triad_census(census.counts, census.std_errors,
                                                     census.n_samples));
    });

    guard("cp", [&] {
        CpConfig cp_cfg;
        cp_cfg.seed = cfg.seed;
        cp_cfg.sweeps_per_node = cfg.cp_sweeps;
        for (const auto& st : state_list) {
            Subnetwork sub = extract_subnetwork(graph, registry, SubnetworkKind::intrastate(st));
            if (sub.graph.node_count() == 0) continue;
            CpReport rep = cp_scores(sub.graph, cp_cfg);
            json j;
            j["state"] = st;
            j["gini_cp"] = rep.gini_cp;
            j["core_entropy"] = rep.core_entropy;
            j["core_node_npi"] = registry.npi_of(sub.to_parent[rep.core_node]);
            CoreCrossState cross =
                core_cross_state(sub.to_parent[rep.core_node], graph, registry);
            j["core_states_reached"] = cross.n_states_reached;
            j["core_cross_referrals"] = cross.n_cross_referrals;
            w.write_json("cp_" + st + ".json", j);

            std::ostringstream csv;
            csv << "npi,cp_score\n";
            for (NodeId u = 0; u < sub.graph.node_count(); ++u)
                csv << registry.npi_of(sub.to_parent[u]) << "," << fmt(rep.cp_score[u]) << "\n";
            w.write_csv("cp_scores_" + st + ".csv", csv.str());
            w.write_svg("cp_hist_" + st + ".svg",
                        svg_histogram(rep.cp_score, 20, "CP score distribution " + st));
        }
    });

    guard("gravity", [&] {
        std::vector<std::pair<const RefGraph*, const PhysicianRegistry*>> pooled = {
            {&graph, &registry}};
        StateFlowMatrix m = aggregate_flows(pooled, {cfg.year});
        GravityFit fit = fit_gravity(m, capital_distance_matrix());
        json j;
        j["g_log"] = fit.g_log;
        j["beta_i"] = fit.beta_i;
        j["beta_j"] = fit.beta_j;
        j["beta_d"] = fit.beta_d;
        j["r_squared"] = fit.r_squared;
        j["residual_se"] = fit.residual_se;
        j["p_value_overall"] = fit.p_value_overall;
        j["n_pairs"] = fit.n_pairs;
        j["n_zero_excluded"] = fit.n_zero_excluded;
        j["flow_proxy_note"] =
            "flows proxy distinct patients by referral counts; records carry no patient ids";
        w.write_json("gravity.json", j);

        std::ostringstream csv;
        auto codes = core_state_codes();
        csv << "from_state,to_state,flow\n";
        for (std::size_t i = 0; i < 50; ++i)
            for (std::size_t jx = 0; jx < 50; ++jx)
                if (i != jx && m.flow(i, jx) > 0)
                    csv << codes[i] << "," << codes[jx] << "," << fmt(m.flow(i, jx)) << "\n";
        w.write_csv("gravity_flows.csv", csv.str());
    });

    guard("features", [&] {
        FeatureConfig fc;
        fc.diameter_seed = cfg.seed;
        fc.diameter_samples = cfg.diameter_samples;
        fc.cp.seed = cfg.seed;
        fc.cp.sweeps_per_node = cfg.cp_sweeps;
        std::vector<StateFeatureVector> rows;
        for (const auto& st : state_list) {
            Subnetwork intra = extract_subnetwork(graph, registry, SubnetworkKind::intrastate(st));
            Subnetwork induced = extract_subnetwork(graph, registry, SubnetworkKind::induced(st));
            rows.push_back(build_features(st, cfg.year, intra, induced, graph, registry, fc));
        }
        w.write_csv("features.csv", table_features(rows));

        // K-means + MDS view over states with complete vectors.
        std::vector<std::vector<double>> pts;
        std::vector<std::string> labels;
        for (const auto& r : rows) {
            std::vector<double> v;
            bool complete = true;
            for (std::size_t k = 1; k <= kFeatureCount; ++k) {
                auto fv = r.get(k);
                if (!fv) {
                    complete = false;
                    break;
                }
                v.push_back(*fv);
            }
            if (complete) {
                pts.push_back(std::move(v));
                labels.push_back(r.state);
            }
        }
        if (pts.size() >= std::max<std::size_t>(cfg.kmeans_k, 3)) {
            // Standardize per dimension.
            for (std::size_t dim = 0; dim < pts.front().size(); ++dim) {
                std::vector<double> col(pts.size());
                for (std::size_t i = 0; i < pts.size(); ++i) col[i] = pts[i][dim];
                standardize(col);
                for (std::size_t i = 0; i < pts.size(); ++i) pts[i][dim] = col[i];
            }
            KMeansResult km = kmeans(pts, cfg.kmeans_k, cfg.seed);
            std::vector<std::vector<double>> dist(pts.size(), std::vector<double>(pts.size(), 0));
            for (std::size_t i = 0; i < pts.size(); ++i)
                for (std::size_t jx = i + 1; jx < pts.size(); ++jx) {
                    double d2 = 0;
                    for (std::size_t k = 0; k < pts[i].size(); ++k)
                        d2 += (pts[i][k] - pts[jx][k]) * (pts[i][k] - pts[jx][k]);
                    dist[i][jx] = dist[jx][i] = std::sqrt(d2);
                }
            MdsResult mds = classical_mds(dist, 2);
            json j;
            j["k"] = cfg.kmeans_k;
            j["sse"] = km.sse;
            for (std::size_t c = 0; c < cfg.kmeans_k; ++c)
                j["nearest_states"].push_back(labels[km.nearest_point[c]]);
            for (std::size_t i = 0; i < labels.size(); ++i)
                j["assignments"][labels[i]] = km.assignments[i];
            w.write_json("kmeans.json", j);
            if (mds.dim >= 2) {
                std::vector<double> xs(pts.size()), ys(pts.size());
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    xs[i] = mds.coords[i][0];
                    ys[i] = mds.coords[i][1];
                }
                w.write_svg("mds.svg", svg_scatter(xs, ys, labels, "state feature MDS", false));
            }
        }
    });

    guard("regress", [&] {
        if (cfg.attributes.empty()) throw input_error("regress requested without --attributes");
        // Rebuild features (cheap at pipeline scale) and regress each outcome.
        FeatureConfig fc;
        fc.diameter_seed = cfg.seed;
        fc.diameter_samples = cfg.diameter_samples;
        fc.cp.seed = cfg.seed;
        fc.cp.sweeps_per_node = cfg.cp_sweeps;
        std::vector<StateFeatureVector> rows;
        for (const auto& st : state_list) {
            Subnetwork intra = extract_subnetwork(graph, registry, SubnetworkKind::intrastate(st));
            Subnetwork induced = extract_subnetwork(graph, registry, SubnetworkKind::induced(st));
            rows.push_back(build_features(st, cfg.year, intra, induced, graph, registry, fc));
        }
        auto attrs = parse_health_attributes(cfg.attributes);
        auto corr = pearson_table(rows, attrs);
        json j;
        for (const auto& cell : corr)
            j["correlations"].push_back({{"feature", cell.feature},
                                         {"attribute", cell.attribute},
                                         {"r", cell.r},
                                         {"r_squared", cell.r_squared},
                                         {"n", cell.n}});
        w.write_json("correlations.json", j);
    });

    auto t_end = std::chrono::steady_clock::now();
    manifest.wall_seconds = std::chrono::duration<double>(t_end - t_start).count();
    manifest.peak_rss_kb = peak_rss_kb();
    for (const auto& name : w.written)
        manifest.artifact_digests[name] = file_digest_hex((w.dir / name).string());

    {
        json j;
        j["command_line"] = manifest.command_line;
        j["config"] = json::parse(manifest.config_snapshot);
        j["input_digests"] = manifest.input_digests;
        j["seed"] = manifest.seed;
        j["version"] = manifest.version;
        j["manifest_digest"] = w.manifest_digest;
        j["wall_seconds"] = manifest.wall_seconds;
        j["peak_rss_kb"] = manifest.peak_rss_kb;
        j["artifact_digests"] = manifest.artifact_digests;
        if (!outcome.failures.empty()) {
            for (const auto& [name, what] : outcome.failures)
                j["failures"].push_back({{"analysis", name}, {"error", what}});
        }
        write_file_atomic((w.dir / "manifest.json").string(), j.dump(2) + "\n");
    }
    outcome.artifacts = w.written;
    outcome.exit_code = outcome.failures.empty() ? 0 : 2;
    return outcome;
}

} // namespace refnet
