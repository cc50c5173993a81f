#include <CLI11.hpp>

#include "lampinn/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace lampinn;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out;
    std::int64_t seed = -1;
    int parallel = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON file");
    cmd->add_option("--preset", args.preset,
                    "named preset: helmholtz-paper, burgers-paper, helmholtz-desk");
    cmd->add_option("--out", args.out, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "global seed (overrides config)");
    cmd->add_option("--parallel", args.parallel, "worker threads for per-task runs")
        ->check(CLI::PositiveNumber);
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_path.empty())
        cfg = ExperimentConfig::load_file(args.config_path);
    else if (!args.preset.empty())
        cfg = ExperimentConfig::preset(args.preset);
    else
        throw std::runtime_error("need --config or --preset");
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out.empty()) cfg.output_dir = args.out;
    // the environment may override only where outputs are rooted
    if (const char* root = std::getenv("LAMPINN_OUT_ROOT")) {
        const std::filesystem::path p(cfg.output_dir);
        if (p.is_relative()) cfg.output_dir = (std::filesystem::path(root) / p).string();
    }
    cfg.check_valid();
    return cfg;
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& file) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = std::filesystem::path(cfg.output_dir) / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

int check_record(const ExperimentRecord& record) {
    if (!record.ok()) {
        std::cerr << "pipeline failed at stage: " << record.failure_stage << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lampinn: clustered modular PINN benchmark driver"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string plot_kind = "convergence";

    CLI::App* doe = app.add_subcommand("doe", "generate the factorial task design");
    CLI::App* preprocess = app.add_subcommand("preprocess", "short sessions and task embeddings");
    CLI::App* cluster = app.add_subcommand("cluster", "cluster task embeddings");
    CLI::App* train = app.add_subcommand("train", "pretrain and run two-phase modular training");
    CLI::App* transfer = app.add_subcommand("transfer", "full pipeline and result export");
    CLI::App* baseline = app.add_subcommand("baseline", "baseline-only results export");
    CLI::App* stats = app.add_subcommand("stats", "recompute summary.json from results.csv");
    CLI::App* report = app.add_subcommand("report", "full pipeline, export, and summary");
    CLI::App* plotdata = app.add_subcommand("plotdata", "emit plot-ready columnar data");
    plotdata
        ->add_option("--kind", plot_kind,
                     "convergence | lambda_trajectory | layer_magnitudes | ood_sweep")
        ->required();
    for (CLI::App* cmd : {doe, preprocess, cluster, train, transfer, baseline, stats, report,
                          plotdata})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const ExperimentConfig cfg = resolve_config(args);

        if (doe->parsed()) {
            ExperimentRecord r = run_pipeline(cfg, args.parallel, "doe");
            if (int rc = check_record(r)) return rc;
            {
                auto os = open_out(cfg, "tasks_train.txt");
                write_task_set(os, cfg.factors, r.train_tasks);
            }
            {
                auto os = open_out(cfg, "tasks_unseen.txt");
                write_task_set(os, ood_extend(cfg.factors, cfg.ood_scale), r.unseen_tasks);
            }
            std::cout << r.train_tasks.size() << " training tasks, " << r.unseen_tasks.size()
                      << " unseen tasks\n";
        } else if (preprocess->parsed() || cluster->parsed()) {
            ExperimentRecord r = run_pipeline(cfg, args.parallel, "preprocess");
            if (int rc = check_record(r)) return rc;
            if (preprocess->parsed()) {
                auto os = open_out(cfg, "embeddings.txt");
                os << "task_id";
                for (Eigen::Index j = 0; j < r.train_embeddings.front().normalized.size(); ++j)
                    os << " f" << j;
                os << "\n";
                for (const TaskEmbedding& e : r.train_embeddings) {
                    os << e.task_id;
                    for (Eigen::Index j = 0; j < e.normalized.size(); ++j)
                        os << " " << e.normalized[j];
                    os << "\n";
                }
                std::cout << "wrote embeddings for " << r.train_embeddings.size() << " tasks\n";
            } else {
                {
                    auto os = open_out(cfg, "clustering.txt");
                    write_clustering(os, r.train_embeddings, r.clustering);
                }
                if (!r.stability.empty()) {
                    auto os = open_out(cfg, "stability.txt");
                    os << "k silhouette_mean silhouette_sd ari_mean\n";
                    for (const StabilityRow& row : r.stability)
                        os << row.k << " " << row.silhouette_mean << " " << row.silhouette_sd
                           << " " << row.ari_mean << "\n";
                }
                std::cout << "k = " << r.clustering.k << "\n";
            }
        } else if (train->parsed()) {
            ExperimentRecord r = run_pipeline(cfg, args.parallel, "train");
            if (int rc = check_record(r)) return rc;
            std::cout << "checkpoints written to " << cfg.output_dir << "\n";
        } else if (transfer->parsed() || report->parsed() || baseline->parsed()) {
            ExperimentRecord r = run_pipeline(cfg, args.parallel);
            if (int rc = check_record(r)) return rc;
            if (baseline->parsed()) {
                std::erase_if(r.rows, [](const ResultRow& row) { return row.method == "lam"; });
                r.lambda_histories.clear();
            }
            export_results(r, cfg.output_dir);
            std::cout << "results in " << cfg.output_dir << " (" << r.rows.size() << " rows, "
                      << r.wall_seconds << " s)\n";
        } else if (stats->parsed()) {
            const auto path = std::filesystem::path(cfg.output_dir) / "results.csv";
            std::ifstream is(path, std::ios::binary);
            if (!is) throw std::runtime_error("cannot read " + path.string());
            const std::vector<ResultRow> rows = parse_results_csv(is);
            const std::string summary = summary_json(rows, cfg.bootstrap_resamples, cfg.seed);
            auto os = open_out(cfg, "summary.json");
            os << summary << "\n";
            std::cout << summary << "\n";
        } else if (plotdata->parsed()) {
            ExperimentRecord r = run_pipeline(cfg, args.parallel);
            if (int rc = check_record(r)) return rc;
            auto os = open_out(cfg, plot_kind + ".txt");
            emit_plot_data(r, plot_kind, os);
            std::cout << "wrote " << plot_kind << ".txt\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
