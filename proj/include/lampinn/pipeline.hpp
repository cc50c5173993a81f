#ifndef LAMPINN_PIPELINE_HPP
#define LAMPINN_PIPELINE_HPP

#include "lampinn/experiment.hpp"

#include <iosfwd>

namespace lampinn {

/// One trajectory sample of one method on one task.
struct ResultRow {
    std::string method;
    std::uint64_t task_id = 0;
    char group = '-';  // 'A', 'B', or '-' when ungrouped
    std::uint64_t seed = 0;
    int epoch = 0;
    double loss = 0.0;
    double mse = 0.0;
};

struct ExperimentRecord {
    ExperimentConfig config;
    std::string config_hash;

    std::vector<TaskConfig> train_tasks;
    std::vector<TaskConfig> unseen_tasks;
    std::vector<bool> unseen_ood;  // outside the original factor box
    std::vector<TaskEmbedding> train_embeddings;
    std::vector<StabilityRow> stability;  // populated when K is auto-selected
    Clustering clustering;
    DenseNet pretrained;
    ModularNet trained;
    GroupSplit groups;

    std::vector<ResultRow> rows;
    std::vector<Mat> lambda_histories;       // one per LAM transfer session
    std::vector<Vec> transfer_layer_mags;    // final per-layer |W| means per transfer run
    double wall_seconds = 0.0;
    std::string failure_stage;  // empty on success

    bool ok() const { return failure_stage.empty(); }
};

/// Execute the full protocol: design, preprocessing and clustering,
/// two-phase modular training, transfer to unseen tasks, baselines.
/// Deterministic in config.seed; per-task seeds are derived by hashing so
/// results do not depend on scheduling. n_threads > 1 fans out the
/// per-task transfer runs. stop_after truncates the pipeline after a named
/// stage ("doe", "pretrain", "preprocess", "train"); empty runs everything.
ExperimentRecord run_pipeline(const ExperimentConfig& config, int n_threads = 1,
                              const std::string& stop_after = "");

std::string results_csv(const ExperimentRecord& record);
std::vector<ResultRow> parse_results_csv(std::istream& is);

/// Table-style aggregates (mean and SD of final MSE per method per group)
/// plus paired comparisons against LAM (Wilcoxon p, bootstrap reduction CI).
std::string summary_json(const std::vector<ResultRow>& rows, int bootstrap_resamples,
                         std::uint64_t seed);

/// Write results.csv, summary.json, config.json, and checkpoints to dir.
void export_results(const ExperimentRecord& record, const std::string& dir);

/// kind: convergence | lambda_trajectory | layer_magnitudes | ood_sweep.
void emit_plot_data(const ExperimentRecord& record, const std::string& kind, std::ostream& os);

/// Reference solution used for grid-MSE evaluation: analytic for
/// Helmholtz, a finite-difference solve for Burgers.
ReferenceField make_eval_field(const ExperimentConfig& config, const PdeProblem& problem);

}  // namespace lampinn

#endif
