#ifndef REFNET_REPORT_HPP
#define REFNET_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "refnet/common.hpp"
#include "refnet/statelab.hpp"

namespace refnet {

constexpr const char* kToolkitVersion = "0.1.0";

// Deterministic identity of a run: configuration, inputs and seeds. The
// digest excludes wall-clock and memory so reruns embed identical ids.
struct RunManifest {
    std::string command_line;
    std::string config_snapshot; // canonical JSON text
    std::map<std::string, std::string> input_digests;
    std::uint64_t seed = 0;
    std::string version = kToolkitVersion;
    double wall_seconds = 0.0;
    long peak_rss_kb = 0;
    std::map<std::string, std::string> artifact_digests;

    std::string digest() const; // over the deterministic fields only
};

// Atomic file write: temp file + rename.
void write_file_atomic(const std::string& path, const std::string& content);

// Tiny SVG scatter/bar emitters used for the paper-style plots.
std::string svg_scatter(const std::vector<double>& x, const std::vector<double>& y,
                        const std::vector<std::string>& labels, const std::string& title,
                        bool log_log);
std::string svg_histogram(const std::vector<double>& values, std::size_t bins,
                          const std::string& title);

struct PipelineConfig {
    std::string referrals;
    std::string npi_states;
    std::string attributes; // optional
    int year = 0;
    std::string format = "from,to,count";
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> analyses; // metrics, smallworld, powerlaw, triads, cp, gravity, features, regress
    std::vector<std::string> states;   // per-state analyses; empty = every labeled state
    std::uint64_t powerlaw_bootstrap = 200;
    std::string powerlaw_direction = "in";
    std::uint64_t triad_samples = 1000000;
    std::uint64_t cp_sweeps = 10000;
    std::size_t diameter_samples = 64;
    std::size_t kmeans_k = 2;

    static PipelineConfig from_json_file(const std::string& path);
    std::string to_canonical_json() const;
};

struct PipelineOutcome {
    int exit_code = 0; // 0 ok, 1 input error, 2 analysis failure
    std::vector<std::pair<std::string, std::string>> failures; // (analysis, what)
    std::vector<std::string> artifacts;
};

PipelineOutcome run_pipeline(const PipelineConfig& config, const std::string& command_line);

// Stable-layout CSV tables mirroring the published layouts.
std::string table_triad_census(const std::array<double, 16>& counts,
                               const std::array<double, 16>& std_errors, std::uint64_t n_samples);
std::string table_features(const std::vector<StateFeatureVector>& rows);
std::string table_powerlaw_pvalues(const std::vector<int>& years,
                                   const std::map<std::string, std::vector<double>>& by_state);

} // namespace refnet

#endif
