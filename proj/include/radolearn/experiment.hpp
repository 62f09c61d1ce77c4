#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radolearn/dataset.hpp"

namespace rado {

struct ExperimentConfig {
    std::string domain;
    std::string dataset_path;
    std::string label_column;
    std::string positive_label;
    std::vector<int> peers;
    std::vector<int> dim_j;
    std::vector<int> bins;
    std::vector<double> share_proportion;
    std::vector<double> gamma_grid{0.01, 1.0, 100.0};
    int folds = 10;
    std::vector<std::uint64_t> seeds{1};
    std::string output_dir = "out";
    std::vector<std::string> shared_candidates;  // optional explicit ordering

    static ExperimentConfig from_file(const std::string& path);
    void validate() const;
};

/// One grid cell x seed of the sweep.
struct CellTask {
    int b = 0;
    double p_s = 0.0;
    int p = 0;
    int dim_j = 0;
    std::uint64_t seed = 0;
};

std::vector<CellTask> plan_cells(const ExperimentConfig& config);

struct ResultRecord {
    std::string domain;
    int b = 0;
    double p_s = 0.0;
    int p = 0;
    int dim_j = 0;
    std::uint64_t seed = 0;
    std::string status;  // "ok" or "skipped"
    std::string note;

    double err_drl = 0.0;
    double err_oracle = 0.0;
    std::vector<double> peer_errors;  // mean error per peer
    std::vector<double> drl_fold_errors;
    double delta = 0.0;
    double q = 0.0;
    bool oracle_sig_better = false;  // oracle beats the block learner at alpha = 0.05
    double gamma_drl = 0.0;          // most frequently selected gamma across folds

    double m_star_mean = 0.0;
    std::int64_t scalars_sent = 0;
    std::int64_t messages_sent = 0;
    bool comm_claim_ok = true;  // scalars <= m*d per fold, and < m*d(total) when m* < m
};

struct RunOptions {
    int threads = 1;
    std::optional<std::string> trace_path;  // JSON-lines protocol trace
};

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config,
                                         const RunOptions& options = {});

/// Writes results.csv, results.json and the long-format delta/q surface
/// tables into the output directory. Rewriting the same records produces
/// byte-identical files.
void emit_tables(const std::vector<ResultRecord>& records, const std::string& out_dir);

/// Flag-driven entry point used by the command-line tool.
/// Exit codes: 0 success, 1 configuration error, 2 runtime error.
int run_cli(int argc, const char* const* argv);

}  // namespace rado
