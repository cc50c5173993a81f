#ifndef LAMPINN_EXPERIMENT_HPP
#define LAMPINN_EXPERIMENT_HPP

#include "lampinn/baselines.hpp"
#include "lampinn/stats.hpp"

namespace lampinn {

/// Everything needed to reproduce one experiment. Serializes to a JSON
/// file with an explicit schema version; every numeric result downstream
/// is a function of this struct alone.
struct ExperimentConfig {
    int schema_version = 1;
    std::string name = "custom";
    PdeFamily family = PdeFamily::Helmholtz2D;

    std::vector<FactorSpec> factors;
    std::vector<double> reference_values;
    double domain_scale = 1.0;  // Helmholtz box scale factor

    std::vector<int> arch;  // full pretrained net
    int split_depth = 2;
    int pretrain_epochs = 1000;
    int m_interior = 400;
    int n_data = 80;
    double lr = 2e-3;

    ShortSessionConfig short_session;
    int k = 3;
    bool auto_k = false;
    std::vector<int> k_range = {2, 3, 4, 5, 6};
    int k_seeds = 5;

    int n1 = 100;
    int n2 = 50;
    int plan_epochs = 1;
    double lambda_main = 1.0;
    double lambda_other = 0.1;

    int transfer_budget = 200;
    int n_unseen = 6;
    int n_transfer_seeds = 3;
    double ood_scale = 100.0;

    bool parameter_only_embedding = false;
    bool random_metrics = false;
    bool fixed_lambda = false;

    std::vector<BaselineKind> baselines = {BaselineKind::Scratch, BaselineKind::Transfer};
    int maml_meta_iters = 200;
    int maml_inner_steps = 1;

    AffinityScore group_score = AffinityScore::L3;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    int eval_grid = 24;
    int bootstrap_resamples = 2000;
    bool resume = false;

    void check_valid() const;

    TaskConfig reference_task() const;
    PdeProblem make_problem(const TaskConfig& task) const;

    /// Named bundles of defaults: "helmholtz-paper", "burgers-paper",
    /// "helmholtz-desk" (reduced domain and budgets).
    static ExperimentConfig preset(const std::string& name);

    std::string to_json_text() const;
    static ExperimentConfig from_json_text(const std::string& text);
    void save_file(const std::string& path) const;
    static ExperimentConfig load_file(const std::string& path);

    /// Stable hash of the canonical JSON form.
    std::string hash() const;
};

std::string affinity_score_name(AffinityScore s);
AffinityScore affinity_score_from_name(const std::string& name);
BaselineKind baseline_from_name(const std::string& name);

}  // namespace lampinn

#endif
