#include "lampinn/pipeline.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace lampinn {

using nlohmann::json;

namespace {

// seed-derivation tags for independent random streams
constexpr std::uint64_t kTagUnseen = 0xA11CEULL;
constexpr std::uint64_t kTagPretrain = 0x12E7ULL;
constexpr std::uint64_t kTagEmbedding = 0xF00DULL;
constexpr std::uint64_t kTagStability = 0x57ABULL;
constexpr std::uint64_t kTagCluster = 0xC1C1ULL;
constexpr std::uint64_t kTagSplit = 0x5EEDULL;
constexpr std::uint64_t kTagPlan = 0x7A17ULL;
constexpr std::uint64_t kTagMaml = 0x3A31ULL;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double pop_sd(const std::vector<double>& xs, double mean) {
    if (xs.empty()) return 0.0;
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

bool in_factor_box(const TaskConfig& task, const std::vector<FactorSpec>& factors) {
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (task.values[i] < factors[i].min || task.values[i] > factors[i].max) return false;
    return true;
}

void run_jobs(int n_jobs, int n_threads, const std::function<void(int)>& job) {
    if (n_threads <= 1 || n_jobs <= 1) {
        for (int i = 0; i < n_jobs; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(n_threads, n_jobs);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) job(i);
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace

ReferenceField make_eval_field(const ExperimentConfig& config, const PdeProblem& problem) {
    if (problem.family == PdeFamily::Helmholtz2D)
        return helmholtz_reference(problem, config.eval_grid);
    // Burgers: pick a step count inside the RK4 stability bound
    const double alpha = problem.task.values.at(0);
    const double nu = problem.task.values.at(1);
    const double amp = std::abs(problem.task.values.at(2));
    const int nx = 256;
    const double dx = 2.0 / nx;
    const double bound =
        std::min(0.4 * dx * dx / nu, 0.4 * dx / std::max(1e-12, 2.0 * alpha * amp));
    const int n_store = 100;
    int nt = static_cast<int>(std::ceil(1.1 / bound));
    nt = ((nt + n_store - 1) / n_store) * n_store;
    return burgers_reference_solve(problem.task, nx, nt, n_store);
}

ExperimentRecord run_pipeline(const ExperimentConfig& config, int n_threads,
                              const std::string& stop_after) {
    const auto t_start = std::chrono::steady_clock::now();
    ExperimentRecord record;
    record.config = config;
    record.config_hash = config.hash();

    auto finish = [&](const std::string& failure) {
        record.failure_stage = failure;
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        return record;
    };

    try {
        config.check_valid();
    } catch (const std::exception&) {
        return finish("config");
    }

    const std::uint64_t seed = config.seed;

    // stage i: design of experiments
    try {
        record.train_tasks = full_factorial(config.family, config.factors);
        const std::vector<FactorSpec> extended = ood_extend(config.factors, config.ood_scale);
        record.unseen_tasks = sample_unseen(config.family, extended, config.n_unseen,
                                            mix_seed(seed, kTagUnseen), record.train_tasks);
        record.unseen_ood.clear();
        for (const TaskConfig& t : record.unseen_tasks)
            record.unseen_ood.push_back(!in_factor_box(t, config.factors));
    } catch (const std::exception&) {
        return finish("doe");
    }
    if (stop_after == "doe") return finish("");

    const std::filesystem::path outdir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);

    // stage ii: pretrain the reference net
    try {
        const std::filesystem::path ckpt = outdir / "pretrained.ckpt";
        bool loaded = false;
        if (config.resume && std::filesystem::exists(ckpt)) {
            std::ifstream is(ckpt, std::ios::binary);
            record.pretrained = read_dense_checkpoint(is);
            loaded = true;
        }
        if (!loaded) {
            const TaskConfig ref = config.reference_task();
            const PdeProblem problem = config.make_problem(ref);
            const CollocationSet colloc = sample_collocation(problem, config.m_interior,
                                                             config.n_data, mix_seed(seed, ref.id));
            record.pretrained = train_scratch(problem, colloc, config.arch,
                                              config.pretrain_epochs, mix_seed(seed, kTagPretrain),
                                              config.lr)
                                    .net;
            std::ofstream os(ckpt, std::ios::binary);
            if (os) write_dense_checkpoint(os, record.pretrained, seed);
        }
    } catch (const std::exception&) {
        return finish("pretrain");
    }
    if (stop_after == "pretrain") return finish("");

    // stage iii: short sessions, embedding, clustering
    try {
        std::vector<std::pair<TaskConfig, LossMetrics>> measured(record.train_tasks.size());
        run_jobs(static_cast<int>(record.train_tasks.size()), n_threads, [&](int i) {
            const TaskConfig& task = record.train_tasks[static_cast<std::size_t>(i)];
            const PdeProblem problem = config.make_problem(task);
            ShortSessionConfig scfg = config.short_session;
            scfg.colloc_seed = mix_seed(seed, task.id);
            measured[static_cast<std::size_t>(i)] = {
                task, short_transfer_session(record.pretrained, problem, scfg)};
        });
        EmbeddingOptions eopts;
        eopts.parameter_only = config.parameter_only_embedding;
        eopts.random_metrics = config.random_metrics;
        eopts.random_seed = mix_seed(seed, kTagEmbedding);
        record.train_embeddings = build_embedding(measured, eopts);

        int k = config.k;
        if (config.auto_k) {
            record.stability = stability_report(record.train_embeddings, config.k_range,
                                                config.k_seeds, mix_seed(seed, kTagStability));
            k = select_k(record.stability);
        }
        record.clustering = kmeans(record.train_embeddings, k, mix_seed(seed, kTagCluster));
    } catch (const std::exception&) {
        return finish("preprocess");
    }
    if (stop_after == "preprocess") return finish("");

    // stage iv: two-phase modular training
    try {
        const std::filesystem::path ckpt = outdir / "trained.ckpt";
        bool loaded = false;
        if (config.resume && std::filesystem::exists(ckpt)) {
            std::ifstream is(ckpt, std::ios::binary);
            record.trained = read_modular_checkpoint(is);
            loaded = true;
        }
        if (!loaded) {
            record.trained = split_pretrained(record.pretrained, config.split_depth,
                                              record.clustering.k, mix_seed(seed, kTagSplit));
            std::vector<std::vector<TaskConfig>> clusters(
                static_cast<std::size_t>(record.clustering.k));
            for (std::size_t i = 0; i < record.train_tasks.size(); ++i)
                clusters[static_cast<std::size_t>(record.clustering.assignments[i])].push_back(
                    record.train_tasks[i]);
            TrainingPlan plan;
            plan.n1 = config.n1;
            plan.n2 = config.n2;
            plan.epochs = config.plan_epochs;
            plan.lambda_main = config.lambda_main;
            plan.lambda_other = config.lambda_other;
            plan.lr = config.lr;
            plan.m_interior = config.m_interior;
            plan.n_data = config.n_data;
            plan.seed = mix_seed(seed, kTagPlan);
            auto factory = [&](const TaskConfig& t) { return config.make_problem(t); };
            phase1_train(record.trained, clusters, plan, factory);
            phase2_train(record.trained, clusters, plan, factory);
            std::ofstream os(ckpt, std::ios::binary);
            if (os) write_modular_checkpoint(os, record.trained, seed, record.clustering.assignments);
        }
    } catch (const std::exception&) {
        return finish("train");
    }
    if (stop_after == "train") return finish("");

    // group split of the unseen tasks by learning affinity
    try {
        if (record.unseen_tasks.size() >= 2 && record.unseen_tasks.size() % 2 == 0) {
            std::vector<std::pair<TaskConfig, LossMetrics>> measured(record.unseen_tasks.size());
            run_jobs(static_cast<int>(record.unseen_tasks.size()), n_threads, [&](int i) {
                const TaskConfig& task = record.unseen_tasks[static_cast<std::size_t>(i)];
                const PdeProblem problem = config.make_problem(task);
                ShortSessionConfig scfg = config.short_session;
                scfg.colloc_seed = mix_seed(seed, task.id);
                measured[static_cast<std::size_t>(i)] = {
                    task, short_transfer_session(record.pretrained, problem, scfg)};
            });
            const std::vector<TaskEmbedding> emb = build_embedding(measured);
            record.groups =
                group_split(emb, static_cast<int>(config.factors.size()), config.group_score);
        }
    } catch (const std::exception&) {
        return finish("group-split");
    }

    // stage v: transfer evaluation, LAM and baselines at equal budgets
    try {
        auto group_of = [&](std::uint64_t task_id) -> char {
            for (std::uint64_t id : record.groups.group_a)
                if (id == task_id) return 'A';
            for (std::uint64_t id : record.groups.group_b)
                if (id == task_id) return 'B';
            return '-';
        };

        DenseNet maml_init;
        bool have_maml = false;
        for (BaselineKind b : config.baselines)
            if (b == BaselineKind::MamlFirstOrder) have_maml = true;
        if (have_maml && record.train_tasks.size() >= 2) {
            MamlOptions mopts;
            mopts.meta_iters = config.maml_meta_iters;
            mopts.inner_steps = config.maml_inner_steps;
            mopts.lr = config.lr;
            mopts.m_interior = config.m_interior;
            mopts.n_data = config.n_data;
            mopts.seed = mix_seed(seed, kTagMaml);
            auto factory = [&](const TaskConfig& t) { return config.make_problem(t); };
            maml_init = maml_train(record.train_tasks, config.arch, mopts, factory).net;
        }

        std::vector<std::string> methods = {"lam"};
        for (BaselineKind b : config.baselines) methods.push_back(baseline_name(b));

        struct Job {
            std::size_t task_index;
            int seed_index;
            std::uint64_t run_seed;
        };
        std::vector<Job> jobs;
        for (std::size_t ti = 0; ti < record.unseen_tasks.size(); ++ti)
            for (int s = 0; s < config.n_transfer_seeds; ++s)
                jobs.push_back({ti, s,
                                mix_seed(seed, mix_seed(record.unseen_tasks[ti].id,
                                                        static_cast<std::uint64_t>(s)))});

        struct JobOut {
            std::vector<ResultRow> rows;
            Mat lambda_history;
            Vec transfer_mags;
            bool has_transfer_mags = false;
        };
        std::vector<JobOut> outs(jobs.size());

        run_jobs(static_cast<int>(jobs.size()), n_threads, [&](int ji) {
            const Job& jb = jobs[static_cast<std::size_t>(ji)];
            JobOut& out = outs[static_cast<std::size_t>(ji)];
            const TaskConfig& task = record.unseen_tasks[jb.task_index];
            const PdeProblem problem = config.make_problem(task);
            const CollocationSet colloc =
                sample_collocation(problem, config.m_interior, config.n_data, jb.run_seed);
            const ReferenceField ref = make_eval_field(config, problem);
            const char grp = group_of(task.id);

            auto push_rows = [&](const std::string& method, const std::vector<double>& losses,
                                 const std::vector<double>& mses) {
                for (std::size_t e = 0; e < losses.size(); ++e) {
                    ResultRow row;
                    row.method = method;
                    row.task_id = task.id;
                    row.group = grp;
                    row.seed = static_cast<std::uint64_t>(jb.seed_index);
                    row.epoch = static_cast<int>(e);
                    row.loss = losses[e];
                    row.mse = e < mses.size() ? mses[e] : std::nan("");
                    out.rows.push_back(std::move(row));
                }
            };

            for (const std::string& method : methods) {
                if (method == "lam") {
                    TransferOptions topts;
                    topts.budget = config.transfer_budget;
                    topts.lr = config.lr;
                    topts.fixed_lambda = config.fixed_lambda;
                    TransferSession s = transfer_adapt(record.trained, problem, colloc, topts, &ref);
                    push_rows("lam", s.losses, s.mses);
                    out.lambda_history = s.lambda_history;
                } else if (method == "pinn-scratch") {
                    BaselineResult r = train_scratch(problem, colloc, config.arch,
                                                     config.transfer_budget, jb.run_seed,
                                                     config.lr, &ref);
                    push_rows(method, r.log.losses, r.log.mses);
                } else if (method == "pinn-transfer") {
                    BaselineResult r = train_transfer(record.pretrained, problem, colloc,
                                                      config.transfer_budget, config.lr, &ref);
                    push_rows(method, r.log.losses, r.log.mses);
                    out.transfer_mags = layer_group_magnitudes(r.net);
                    out.has_transfer_mags = true;
                } else if (method == "maml") {
                    if (record.train_tasks.size() < 2) continue;
                    BaselineResult r = maml_adapt(maml_init, problem, colloc,
                                                  config.transfer_budget, config.lr, &ref);
                    push_rows(method, r.log.losses, r.log.mses);
                }
            }
        });

        for (JobOut& out : outs) {
            record.rows.insert(record.rows.end(), out.rows.begin(), out.rows.end());
            if (out.lambda_history.size() > 0) record.lambda_histories.push_back(out.lambda_history);
            if (out.has_transfer_mags) record.transfer_layer_mags.push_back(out.transfer_mags);
        }
    } catch (const std::exception&) {
        return finish("transfer");
    }

    return finish("");
}

std::string results_csv(const ExperimentRecord& record) {
    std::string out = "method,task_id,group,seed,epoch,loss,mse\n";
    for (const ResultRow& r : record.rows) {
        out += r.method;
        out += ',';
        out += std::to_string(r.task_id);
        out += ',';
        out += r.group;
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += std::to_string(r.epoch);
        out += ',';
        out += fmt(r.loss);
        out += ',';
        out += fmt(r.mse);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_results_csv(std::istream& is) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(is, line) || line != "method,task_id,group,seed,epoch,loss,mse")
        throw std::runtime_error("results csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        ResultRow r;
        std::getline(ss, r.method, ',');
        std::getline(ss, field, ',');
        r.task_id = std::stoull(field);
        std::getline(ss, field, ',');
        if (field.size() != 1) throw std::runtime_error("results csv: bad group field");
        r.group = field[0];
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.epoch = std::stoi(field);
        std::getline(ss, field, ',');
        r.loss = std::stod(field);
        std::getline(ss, field, ',');
        r.mse = std::stod(field);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string summary_json(const std::vector<ResultRow>& rows, int bootstrap_resamples,
                         std::uint64_t seed) {
    // final-epoch MSE per (method, task, seed)
    struct Key {
        std::string method;
        std::uint64_t task;
        std::uint64_t seed;
        bool operator<(const Key& o) const {
            return std::tie(method, task, seed) < std::tie(o.method, o.task, o.seed);
        }
    };
    std::map<Key, std::pair<int, double>> last;  // max epoch + its mse
    std::map<std::uint64_t, char> task_group;
    for (const ResultRow& r : rows) {
        auto& slot = last[{r.method, r.task_id, r.seed}];
        if (slot.first <= r.epoch) slot = {r.epoch, r.mse};
        task_group[r.task_id] = r.group;
    }

    // per-method: task -> mean final MSE over seeds
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> per_task;
    for (const auto& [key, val] : last) per_task[key.method][key.task].push_back(val.second);

    json j;
    j["methods"] = json::object();
    std::map<std::string, std::map<std::uint64_t, double>> task_means;
    for (const auto& [method, tasks] : per_task) {
        std::map<char, std::vector<double>> by_group;
        std::vector<double> all;
        for (const auto& [task, mses] : tasks) {
            const double m = mean_of(mses);
            task_means[method][task] = m;
            by_group[task_group[task]].push_back(m);
            all.push_back(m);
        }
        json mj;
        const double overall = mean_of(all);
        mj["mean_mse"] = overall;
        mj["sd_mse"] = pop_sd(all, overall);
        mj["n_tasks"] = all.size();
        for (const auto& [grp, xs] : by_group) {
            if (grp == '-') continue;
            const double gm = mean_of(xs);
            mj[grp == 'A' ? "group_a" : "group_b"] = {
                {"mean_mse", gm}, {"sd_mse", pop_sd(xs, gm)}, {"n_tasks", xs.size()}};
        }
        j["methods"][method] = mj;
    }

    // paired comparisons: each baseline vs lam over shared tasks
    j["comparisons"] = json::object();
    const auto lam_it = task_means.find("lam");
    if (lam_it != task_means.end()) {
        for (const auto& [method, tasks] : task_means) {
            if (method == "lam") continue;
            PairedSample pairs;
            for (const auto& [task, base_mse] : tasks) {
                const auto ours = lam_it->second.find(task);
                if (ours == lam_it->second.end()) continue;
                pairs.ours.push_back(ours->second);
                pairs.base.push_back(base_mse);
            }
            if (pairs.size() < 2) continue;
            json cj;
            const ReductionCi ci = bootstrap_reduction_ci(pairs, bootstrap_resamples, seed);
            cj["reduction_percent"] = ci.reduction_percent;
            cj["ci_low"] = ci.ci_low;
            cj["ci_high"] = ci.ci_high;
            int nonzero = 0;
            for (std::size_t i = 0; i < pairs.size(); ++i)
                if (pairs.ours[i] != pairs.base[i]) ++nonzero;
            if (nonzero == 0 || nonzero >= 5) {
                const WilcoxonResult w = wilcoxon_signed_rank(pairs);
                cj["wilcoxon_p"] = w.p_value;
                cj["wilcoxon_statistic"] = w.statistic;
                cj["wilcoxon_degenerate"] = w.degenerate;
            }
            j["comparisons"][method] = cj;
        }
    }
    return j.dump(2);
}

void export_results(const ExperimentRecord& record, const std::string& dir) {
    if (record.rows.empty()) throw std::invalid_argument("export_results: no rows");
    const std::filesystem::path out(dir);
    std::filesystem::create_directories(out);

    {
        std::ofstream os(out / "results.csv", std::ios::binary);
        if (!os) throw std::runtime_error("export_results: cannot write results.csv");
        os << results_csv(record);
    }
    {
        std::ofstream os(out / "summary.json", std::ios::binary);
        if (!os) throw std::runtime_error("export_results: cannot write summary.json");
        os << summary_json(record.rows, record.config.bootstrap_resamples, record.config.seed)
           << "\n";
    }
    record.config.save_file((out / "config.json").string());
    {
        std::ofstream os(out / "record.json", std::ios::binary);
        json j;
        j["config_hash"] = record.config_hash;
        j["wall_seconds"] = record.wall_seconds;
        j["failure_stage"] = record.failure_stage;
        j["n_train_tasks"] = record.train_tasks.size();
        j["n_unseen_tasks"] = record.unseen_tasks.size();
        j["k"] = record.clustering.k;
        j["seed"] = record.config.seed;
        os << j.dump(2) << "\n";
    }
}

void emit_plot_data(const ExperimentRecord& record, const std::string& kind, std::ostream& os) {
    if (kind == "convergence") {
        // per seed, the task-mean MSE curve; mean and SD taken over seeds
        os << "method epoch mean_mse sd_mse\n";
        std::map<std::string, std::map<int, std::map<std::uint64_t, std::vector<double>>>> series;
        for (const ResultRow& r : record.rows) series[r.method][r.epoch][r.seed].push_back(r.mse);
        for (const auto& [method, epochs] : series)
            for (const auto& [epoch, by_seed] : epochs) {
                std::vector<double> seed_means;
                for (const auto& [sid, xs] : by_seed) seed_means.push_back(mean_of(xs));
                const double m = mean_of(seed_means);
                os << method << ' ' << epoch << ' ' << fmt(m) << ' ' << fmt(pop_sd(seed_means, m))
                   << "\n";
            }
    } else if (kind == "lambda_trajectory") {
        if (record.lambda_histories.empty())
            throw std::invalid_argument("emit_plot_data: no lambda trajectories recorded");
        const int k = static_cast<int>(record.lambda_histories.front().cols());
        Eigen::Index n_rows = record.lambda_histories.front().rows();
        for (const Mat& h : record.lambda_histories) n_rows = std::min(n_rows, h.rows());
        os << "epoch";
        for (int jcol = 0; jcol < k; ++jcol) os << " lambda_" << jcol;
        os << "\n";
        for (Eigen::Index e = 0; e < n_rows; ++e) {
            os << e;
            for (int jcol = 0; jcol < k; ++jcol) {
                double acc = 0.0;
                for (const Mat& h : record.lambda_histories) acc += h(e, jcol);
                os << ' ' << fmt(acc / static_cast<double>(record.lambda_histories.size()));
            }
            os << "\n";
        }
    } else if (kind == "layer_magnitudes") {
        os << "layer mean_mag sd_mag\n";
        std::vector<Vec> mags = record.transfer_layer_mags;
        if (mags.empty()) mags.push_back(layer_group_magnitudes(record.pretrained));
        for (Eigen::Index l = 0; l < mags.front().size(); ++l) {
            std::vector<double> xs;
            for (const Vec& m : mags) xs.push_back(m[l]);
            const double m = mean_of(xs);
            os << l << ' ' << fmt(m) << ' ' << fmt(pop_sd(xs, m)) << "\n";
        }
    } else if (kind == "ood_sweep") {
        os << "task_id ood mean_mse sd_mse\n";
        std::map<std::uint64_t, std::vector<double>> finals;
        std::map<std::uint64_t, int> last_epoch;
        for (const ResultRow& r : record.rows) {
            if (r.method != "lam") continue;
            if (r.epoch >= last_epoch[r.task_id]) last_epoch[r.task_id] = r.epoch;
        }
        for (const ResultRow& r : record.rows)
            if (r.method == "lam" && r.epoch == last_epoch[r.task_id])
                finals[r.task_id].push_back(r.mse);
        for (std::size_t i = 0; i < record.unseen_tasks.size(); ++i) {
            const std::uint64_t id = record.unseen_tasks[i].id;
            const auto it = finals.find(id);
            if (it == finals.end()) continue;
            const double m = mean_of(it->second);
            os << id << ' ' << (record.unseen_ood[i] ? 1 : 0) << ' ' << fmt(m) << ' '
               << fmt(pop_sd(it->second, m)) << "\n";
        }
    } else {
        throw std::invalid_argument("emit_plot_data: unknown kind " + kind);
    }
}

}  // namespace lampinn
