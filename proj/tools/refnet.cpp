// refnet: physician referral network analysis toolkit.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "refnet/gravity.hpp"
#include "refnet/metrics.hpp"
#include "refnet/motifs.hpp"
#include "refnet/nullmodels.hpp"
#include "refnet/powerlaw.hpp"
#include "refnet/report.hpp"

using json = nlohmann::json;
using namespace refnet;

namespace {

void write_json_file(const std::string& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

std::pair<RefGraph, PhysicianRegistry> load_cached(const std::string& path) {
    RefGraph g;
    PhysicianRegistry reg;
    load_graph_cache(path, g, reg);
    return {std::move(g), std::move(reg)};
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<StateFeatureVector> read_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open features file: " + path);
    std::string line;
    std::vector<StateFeatureVector> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) { // state,year,f1..f31
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        StateFeatureVector v;
        std::getline(ss, v.state, ',');
        std::getline(ss, tok, ',');
        v.year = std::stoi(tok);
        for (std::size_t k = 0; k < kFeatureCount && std::getline(ss, tok, ','); ++k) {
            if (tok != "NA" && !tok.empty()) v.f[k] = std::stod(tok);
        }
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw input_error("no feature rows in " + path);
    return rows;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"refnet: physician referral network toolkit"};
    app.require_subcommand(1);

    std::string cmdline;
    for (int i = 0; i < argc; ++i) {
        if (i) cmdline += ' ';
        cmdline += argv[i];
    }

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "parse and validate input files");
    std::string in_referrals, in_npi, in_attrs, in_format = "from,to,count", in_out;
    int in_year = 0;
    ingest->add_option("--referrals", in_referrals)->required();
    ingest->add_option("--npi-states", in_npi);
    ingest->add_option("--attributes", in_attrs);
    ingest->add_option("--year", in_year)->required();
    ingest->add_option("--format", in_format);
    ingest->add_option("--out", in_out)->required();

    // ---- graph ----
    auto* graphc = app.add_subcommand("graph", "build a graph cache");
    std::string g_referrals, g_npi, g_format = "from,to,count", g_subnet = "national", g_out;
    int g_year = 0;
    graphc->add_option("--referrals", g_referrals)->required();
    graphc->add_option("--npi-states", g_npi);
    graphc->add_option("--year", g_year)->required();
    graphc->add_option("--format", g_format);
    graphc->add_option("--subnet", g_subnet, "national | induced:XX | intrastate:XX");
    graphc->add_option("--out", g_out)->required();

    // ---- metrics ----
    auto* metricsc = app.add_subcommand("metrics", "descriptive statistics of a graph");
    std::string m_graph, m_out;
    metricsc->add_option("--graph", m_graph)->required();
    metricsc->add_option("--out", m_out)->required();

    // ---- powerlaw ----
    auto* plc = app.add_subcommand("powerlaw", "discrete power-law fit and GoF");
    std::string pl_graph, pl_dir = "in", pl_out, pl_ccdf, pl_svg;
    std::uint64_t pl_boot = 1000, pl_seed = 0;
    plc->add_option("--graph", pl_graph)->required();
    plc->add_option("--direction", pl_dir)->check(CLI::IsMember({"in", "out"}));
    plc->add_option("--bootstrap", pl_boot);
    plc->add_option("--seed", pl_seed);
    plc->add_option("--out", pl_out)->required();
    plc->add_option("--ccdf", pl_ccdf);
    plc->add_option("--svg", pl_svg);

    // ---- cp ----
    auto* cpc = app.add_subcommand("cp", "core-periphery scores");
    std::string cp_graph, cp_out, cp_scores_csv;
    std::vector<double> cp_alpha, cp_beta;
    std::uint64_t cp_seed = 0, cp_sweeps = 10000;
    cpc->add_option("--graph", cp_graph)->required();
    cpc->add_option("--alpha-grid", cp_alpha);
    cpc->add_option("--beta-grid", cp_beta);
    cpc->add_option("--seed", cp_seed);
    cpc->add_option("--sweeps", cp_sweeps);
    cpc->add_option("--out", cp_out)->required();
    cpc->add_option("--scores", cp_scores_csv);

    // ---- triads ----
    auto* triadc = app.add_subcommand("triads", "dyad and triad censuses");
    std::string t_graph, t_out, t_csv;
    std::uint64_t t_samples = 1000000, t_seed = 0;
    bool t_exact = false, t_anchored = false;
    triadc->add_option("--graph", t_graph)->required();
    triadc->add_option("--samples", t_samples);
    triadc->add_option("--seed", t_seed);
    triadc->add_flag("--exact", t_exact);
    triadc->add_flag("--anchored", t_anchored, "sample a connected dyad plus a random third node");
    triadc->add_option("--out", t_out)->required();
    triadc->add_option("--csv", t_csv);

    // ---- null ----
    auto* nullc = app.add_subcommand("null", "generate ER / Watts-Strogatz graphs");
    std::string n_model, n_out;
    std::size_t n_n = 0, n_k = 4;
    double n_p = 0.01, n_beta = 0.0;
    std::uint64_t n_seed = 0;
    nullc->add_option("--model", n_model)->required()->check(CLI::IsMember({"er", "ws"}));
    nullc->add_option("--n", n_n)->required();
    nullc->add_option("--p", n_p);
    nullc->add_option("--k", n_k);
    nullc->add_option("--beta", n_beta);
    nullc->add_option("--seed", n_seed);
    nullc->add_option("--out", n_out)->required();

    // ---- smallworld ----
    auto* swc = app.add_subcommand("smallworld", "small-world verdict");
    std::string sw_graph, sw_out;
    std::uint64_t sw_seed = 0;
    swc->add_option("--graph", sw_graph)->required();
    swc->add_option("--seed", sw_seed);
    swc->add_option("--out", sw_out);

    // ---- gravity ----
    auto* gravc = app.add_subcommand("gravity", "interstate gravity-law fit");
    std::vector<std::string> gr_graphs;
    std::string gr_out, gr_flows;
    gravc->add_option("--graphs", gr_graphs, "graph caches, one per pooled year")->required();
    gravc->add_option("--out", gr_out)->required();
    gravc->add_option("--flows", gr_flows);

    // ---- features ----
    auto* featc = app.add_subcommand("features", "state feature vectors f1..f31");
    std::string f_graph, f_out;
    int f_year = 0;
    std::vector<std::string> f_states;
    std::uint64_t f_seed = 0, f_sweeps = 10000;
    featc->add_option("--graph", f_graph)->required();
    featc->add_option("--year", f_year)->required();
    featc->add_option("--states", f_states);
    featc->add_option("--seed", f_seed);
    featc->add_option("--cp-sweeps", f_sweeps);
    featc->add_option("--out", f_out)->required();

    // ---- regress ----
    auto* regc = app.add_subcommand("regress", "mixed-effects regression of an outcome");
    std::string r_features, r_attrs, r_outcome, r_out;
    std::vector<std::string> r_predictors;
    bool r_select = false;
    regc->add_option("--features", r_features)->required();
    regc->add_option("--attributes", r_attrs)->required();
    regc->add_option("--outcome", r_outcome)->required();
    regc->add_option("--predictors", r_predictors, "fixed predictor list, e.g. f1 f25 f16");
    regc->add_flag("--select", r_select, "stepwise forward selection + interaction pruning");
    regc->add_option("--out", r_out)->required();

    // ---- pipeline ----
    auto* pipec = app.add_subcommand("pipeline", "run a declarative analysis config");
    std::string p_config, p_out;
    pipec->add_option("--config", p_config)->required();
    pipec->add_option("--out", p_out, "override the config's output directory");

    CLI11_PARSE(app, argc, argv);

    if (ingest->parsed()) {
        return guarded([&] {
            std::filesystem::create_directories(in_out);
            FormatSpec spec = FormatSpec::parse(in_format);
            std::vector<RawReferralRecord> records;
            IngestReport rep = parse_referrals(in_referrals, spec, in_year,
                                               [&](const RawReferralRecord& r) { records.push_back(r); });
            {
                std::ostringstream os;
                FormatSpec canon; // canonical from,to,count with header
                canon.has_header = true;
                write_referrals_csv(os, records, canon);
                write_file_atomic(in_out + "/referrals_validated.csv", os.str());
            }
            json j;
            j["rows"] = rep.total_rows;
            j["emitted"] = rep.emitted;
            j["malformed"] = rep.malformed;
            j["self_loops"] = rep.self_loops;
            j["errors_sample"] = rep.sample_errors;
            if (!in_npi.empty()) {
                IngestReport nrep;
                auto recs = parse_npi_states(in_npi, in_year, &nrep);
                j["npi_states"] = {{"rows", nrep.total_rows},
                                   {"emitted", nrep.emitted},
                                   {"rejected", nrep.malformed},
                                   {"errors_sample", nrep.sample_errors}};
                std::ostringstream os;
                os << "npi,state\n";
                for (const auto& r : recs) os << r.npi << "," << r.state << "\n";
                write_file_atomic(in_out + "/npi_states_validated.csv", os.str());
            }
            if (!in_attrs.empty()) {
                auto attrs = parse_health_attributes(in_attrs);
                j["attributes"] = {{"records", attrs.size()}};
            }
            write_json_file(in_out + "/ingest_report.json", j);
            std::cout << "ingest: " << rep.emitted << " records, " << rep.malformed
                      << " malformed, " << rep.self_loops << " self-loops\n";
        });
    }

    if (graphc->parsed()) {
        return guarded([&] {
            FormatSpec spec = FormatSpec::parse(g_format);
            GraphBuilder builder;
            parse_referrals(g_referrals, spec, g_year,
                            [&](const RawReferralRecord& r) { builder.add(r); });
            auto [graph, registry] = builder.finish();
            if (!g_npi.empty()) {
                auto npi_records = parse_npi_states(g_npi, g_year);
                assign_states(registry, graph, npi_records);
            }
            SubnetworkKind kind = SubnetworkKind::parse(g_subnet);
            if (kind.level == SubnetworkKind::Level::National) {
                save_graph_cache(g_out, graph, registry);
            } else {
                Subnetwork sub = extract_subnetwork(graph, registry, kind);
                PhysicianRegistry sub_reg;
                for (NodeId u = 0; u < sub.graph.node_count(); ++u) {
                    NodeId parent = sub.to_parent[u];
                    sub_reg.intern(registry.npi_of(parent));
                    sub_reg.set_state(u, registry.state_of(parent));
                }
                sub_reg.ensure_state_size(sub.graph.node_count());
                save_graph_cache(g_out, sub.graph, sub_reg);
            }
            std::cout << "graph: " << graph.node_count() << " nodes, " << graph.edge_count()
                      << " edges (" << g_subnet << " cached)\n";
        });
    }

    if (metricsc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(m_graph);
            json j;
            j["nodes"] = graph.node_count();
            j["edges"] = graph.edge_count();
            DegreeStats ds = degree_stats(graph, false);
            j["f1_mean_degree"] = ds.mean_degree;
            ClusteringReport cl = clustering(graph);
            j["global_clustering"] = cl.global_c;
            j["local_clustering"] = opt_json(cl.local_c);
            j["er_expected_clustering"] = cl.er_expected;
            AssortativityReport ar = assortativity(graph);
            j["assortativity_in_in"] = opt_json(ar.r_in_in);
            j["assortativity_out_out"] = opt_json(ar.r_out_out);
            j["assortativity_in_out"] = opt_json(ar.r_in_out);
            j["assortativity_out_in"] = opt_json(ar.r_out_in);
            j["assortativity_fisher_se"] = ar.fisher_se;
            j["undirected_assortativity"] = opt_json(undirected_assortativity(graph));
            j["self_degree_correlation"] = opt_json(self_degree_correlation(graph));
            ReciprocityReport rc = reciprocity(graph);
            j["reciprocity_correlation"] = opt_json(rc.corr);
            j["reciprocity_r_squared"] = rc.corr ? json(rc.r_squared) : json(nullptr);
            j["bidirectional_fraction"] = rc.bidirectional_fraction;
            DyadCensus dc = dyad_census(graph);
            j["dyad_null"] = dc.null_pairs;
            j["dyad_asymmetric"] = dc.asymmetric;
            j["dyad_mutual"] = dc.mutual;
            try {
                j["gini_in_degree"] = gini(ds.in_degrees);
                j["gini_out_degree"] = gini(ds.out_degrees);
            } catch (const analysis_error&) {
                j["gini_in_degree"] = nullptr;
                j["gini_out_degree"] = nullptr;
            }
            write_json_file(m_out, j);
        });
    }

    if (plc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(pl_graph);
            DegreeStats ds = degree_stats(graph, false);
            const auto& deg = pl_dir == "out" ? ds.out_degrees : ds.in_degrees;
            std::vector<std::uint64_t> positive;
            for (double v : deg)
                if (v > 0) positive.push_back(static_cast<std::uint64_t>(v));
            PowerLawFit fit = fit_powerlaw(positive);
            GofResult gof = gof_pvalue(positive, fit, pl_boot, pl_seed);
            json j;
            j["direction"] = pl_dir;
            j["alpha"] = fit.alpha;
            j["xmin"] = fit.xmin;
            j["n_tail"] = fit.n_tail;
            j["ks_stat"] = fit.ks_stat;
            j["normalization"] = fit.normalization;
            j["p_value"] = gof.p_value;
            j["n_bootstrap"] = gof.n_bootstrap;
            j["seed"] = gof.seed;
            write_json_file(pl_out, j);
            if (!pl_ccdf.empty() || !pl_svg.empty()) {
                std::vector<double> sorted;
                for (double v : deg)
                    if (v > 0) sorted.push_back(v);
                std::sort(sorted.begin(), sorted.end());
                std::vector<double> xs, ys;
                std::size_t i = 0;
                while (i < sorted.size()) {
                    std::size_t k = i;
                    while (k < sorted.size() && sorted[k] == sorted[i]) ++k;
                    xs.push_back(sorted[i]);
                    ys.push_back(static_cast<double>(sorted.size() - i) /
                                 static_cast<double>(sorted.size()));
                    i = k;
                }
                if (!pl_ccdf.empty()) {
                    std::ostringstream os;
                    os << "degree,ccdf\n";
                    for (std::size_t q = 0; q < xs.size(); ++q)
                        os << xs[q] << "," << ys[q] << "\n";
                    write_file_atomic(pl_ccdf, os.str());
                }
                if (!pl_svg.empty())
                    write_file_atomic(pl_svg, svg_scatter(xs, ys, {}, "log-log CCDF", true));
            }
        });
    }

    if (cpc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(cp_graph);
            CpConfig cfg;
            if (!cp_alpha.empty()) cfg.alpha_grid = cp_alpha;
            if (!cp_beta.empty()) cfg.beta_grid = cp_beta;
            cfg.seed = cp_seed;
            cfg.sweeps_per_node = cp_sweeps;
            CpReport rep = cp_scores(graph, cfg);
            json j;
            j["gini_cp"] = rep.gini_cp;
            j["core_entropy"] = rep.core_entropy;
            j["core_node"] = rep.core_node;
            j["core_node_npi"] =
                registry.size() > rep.core_node ? registry.npi_of(rep.core_node) : "";
            write_json_file(cp_out, j);
            if (!cp_scores_csv.empty()) {
                std::ostringstream os;
                os << "node,npi,cp_score\n";
                for (NodeId u = 0; u < graph.node_count(); ++u)
                    os << u << "," << (registry.size() > u ? registry.npi_of(u) : "") << ","
                       << rep.cp_score[u] << "\n";
                write_file_atomic(cp_scores_csv, os.str());
            }
        });
    }

    if (triadc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(t_graph);
            TriadCensus census;
            if (t_exact) census = triad_census_exact(graph);
            else if (t_anchored) census = triad_census_mc_dyad_anchored(graph, t_samples, t_seed);
            else census = triad_census_mc(graph, t_samples, t_seed);
            json j;
            j["mode"] = t_exact ? "exact" : (t_anchored ? "mc_dyad_anchored" : "mc_uniform");
            j["n_samples"] = census.n_samples;
            j["seed"] = census.seed;
            for (int k = 0; k < 16; ++k) {
                auto key = "T" + std::to_string(k + 1);
                j["counts"][key] = census.counts[static_cast<std::size_t>(k)];
                if (census.n_samples) {
                    j["tallies"][key] = census.tallies[static_cast<std::size_t>(k)];
                    j["std_errors"][key] = census.std_errors[static_cast<std::size_t>(k)];
                }
            }
            DyadCensus dc = dyad_census(graph);
            j["dyads"] = {{"null", dc.null_pairs}, {"asymmetric", dc.asymmetric}, {"mutual", dc.mutual}};
            write_json_file(t_out, j);
            if (!t_csv.empty())
                write_file_atomic(t_csv, table_triad_census(census.counts, census.std_errors,
                                                            census.n_samples));
        });
    }

    if (nullc->parsed()) {
        return guarded([&] {
            RefGraph g = n_model == "er" ? generate_er(n_n, n_p, n_seed)
                                         : generate_ws(n_n, n_k, n_beta, n_seed);
            PhysicianRegistry reg;
            reg.ensure_state_size(g.node_count());
            save_graph_cache(n_out, g, reg);
            std::cout << n_model << ": " << g.node_count() << " nodes, " << g.edge_count()
                      << " directed edges\n";
        });
    }

    if (swc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(sw_graph);
            SmallWorldThresholds th;
            th.seed = sw_seed;
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
            if (sw_out.empty()) std::cout << j.dump(2) << "\n";
            else write_json_file(sw_out, j);
        });
    }

    if (gravc->parsed()) {
        return guarded([&] {
            std::vector<std::pair<RefGraph, PhysicianRegistry>> loaded;
            loaded.reserve(gr_graphs.size());
            for (const auto& path : gr_graphs) loaded.push_back(load_cached(path));
            std::vector<std::pair<const RefGraph*, const PhysicianRegistry*>> refs;
            std::vector<int> years;
            for (std::size_t i = 0; i < loaded.size(); ++i) {
                refs.emplace_back(&loaded[i].first, &loaded[i].second);
                years.push_back(static_cast<int>(i));
            }
            StateFlowMatrix m = aggregate_flows(refs, years);
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
            write_json_file(gr_out, j);
            if (!gr_flows.empty()) {
                std::ostringstream os;
                auto codes = core_state_codes();
                os << "from_state,to_state,flow\n";
                for (std::size_t i = 0; i < 50; ++i)
                    for (std::size_t jx = 0; jx < 50; ++jx)
                        if (i != jx && m.flow(i, jx) > 0)
                            os << codes[i] << "," << codes[jx] << "," << m.flow(i, jx) << "\n";
                write_file_atomic(gr_flows, os.str());
            }
        });
    }

    if (featc->parsed()) {
        return guarded([&] {
            auto [graph, registry] = load_cached(f_graph);
            std::vector<std::string> states = f_states;
            if (states.empty()) {
                std::set<std::string> seen;
                for (NodeId u = 0; u < graph.node_count(); ++u)
                    if (is_core_state(registry.state_of(u)))
                        seen.insert(state_code(registry.state_of(u)));
                states.assign(seen.begin(), seen.end());
            }
            if (states.empty())
                throw input_error("graph cache has no state labels; rebuild with --npi-states");
            FeatureConfig fc;
            fc.diameter_seed = f_seed;
            fc.cp.seed = f_seed;
            fc.cp.sweeps_per_node = f_sweeps;
            std::vector<StateFeatureVector> rows;
            for (const auto& st : states) {
                Subnetwork intra = extract_subnetwork(graph, registry, SubnetworkKind::intrastate(st));
                Subnetwork induced = extract_subnetwork(graph, registry, SubnetworkKind::induced(st));
                rows.push_back(build_features(st, f_year, intra, induced, graph, registry, fc));
            }
            write_file_atomic(f_out, table_features(rows));
        });
    }

    if (regc->parsed()) {
        return guarded([&] {
            auto rows = read_features_csv(r_features);
            auto attrs = parse_health_attributes(r_attrs);
            std::map<std::pair<std::string, int>, double> outcome;
            for (const auto& a : attrs)
                if (a.attribute_name == r_outcome) outcome[{a.state, a.year}] = a.value;
            if (outcome.empty()) throw input_error("outcome not present: " + r_outcome);

            std::vector<std::size_t> cand_idx;
            if (r_predictors.empty()) {
                for (std::size_t k = 1; k <= kFeatureCount; ++k) cand_idx.push_back(k);
            } else {
                for (const auto& name : r_predictors) {
                    if (name.size() < 2 || name[0] != 'f')
                        throw input_error("predictor names look like f7: " + name);
                    cand_idx.push_back(static_cast<std::size_t>(std::stoul(name.substr(1))));
                }
            }
            std::vector<std::string> cand_names;
            for (std::size_t k : cand_idx) cand_names.push_back("f" + std::to_string(k));

            std::vector<MixedModelObs> data;
            std::size_t dropped = 0;
            for (const auto& row : rows) {
                auto it = outcome.find({row.state, row.year});
                if (it == outcome.end()) continue;
                MixedModelObs obs;
                obs.state = row.state;
                obs.year = row.year;
                obs.y = it->second;
                bool complete = true;
                for (std::size_t k : cand_idx) {
                    auto v = row.get(k);
                    if (!v) {
                        complete = false;
                        break;
                    }
                    obs.x.push_back(*v);
                }
                if (complete) data.push_back(std::move(obs));
                else ++dropped;
            }
            if (data.empty()) throw analysis_error("no complete-case rows for " + r_outcome);

            json j;
            j["outcome"] = r_outcome;
            j["n_obs"] = data.size();
            j["dropped_incomplete_rows"] = dropped;
            auto fill_fit = [&](const MixedModelFit& fit) {
                json f;
                f["beta0"] = fit.beta0;
                f["tau2"] = fit.tau2;
                f["sigma2"] = fit.sigma2;
                f["loglik"] = fit.loglik;
                for (std::size_t k = 0; k < fit.predictors.size(); ++k)
                    f["beta1"].push_back({{"predictor", fit.predictors[k]},
                                          {"coefficient", fit.beta1[k]},
                                          {"se", fit.beta1_se[k]}});
                for (std::size_t k = 0; k < fit.interactions.size(); ++k)
                    f["beta2"].push_back({{"predictor", fit.interactions[k]},
                                          {"coefficient", fit.beta2[k]},
                                          {"se", fit.beta2_se[k]}});
                for (std::size_t k = 0; k < fit.year_levels.size(); ++k)
                    f["lambda"].push_back({{"year", fit.year_levels[k]}, {"effect", fit.lambda[k]}});
                return f;
            };
            if (r_select) {
                StepwiseResult res = stepwise_select(data, cand_names);
                j["selected"] = res.selected;
                j["retained_interactions"] = res.retained_interactions;
                for (const auto& [name, p] : res.trace)
                    j["trace"].push_back({{"candidate", name}, {"p", p}});
                j["fit"] = fill_fit(res.fit);
            } else {
                MixedModelFit fit = fit_mixed_model(data, cand_names);
                j["fit"] = fill_fit(fit);
            }
            write_json_file(r_out, j);
        });
    }

    if (pipec->parsed()) {
        int code = 0;
        code = guarded([&] {
            PipelineConfig cfg = PipelineConfig::from_json_file(p_config);
            if (!p_out.empty()) cfg.out_dir = p_out;
            PipelineOutcome out = run_pipeline(cfg, cmdline);
            for (const auto& [name, what] : out.failures)
                std::cerr << "analysis failed: " << name << ": " << what << "\n";
            std::cout << "pipeline wrote " << out.artifacts.size() << " artifacts to "
                      << cfg.out_dir << "\n";
            if (out.exit_code != 0) throw analysis_error("pipeline had failing analyses");
        });
        return code;
    }

    return 0;
}
