#include "lampinn/experiment.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lampinn {

using nlohmann::json;

std::string affinity_score_name(AffinityScore s) {
    switch (s) {
        case AffinityScore::L1: return "l1";
        case AffinityScore::L2: return "l2";
        case AffinityScore::L3: return "l3";
        case AffinityScore::EmbeddingNorm: return "norm";
    }
    throw std::logic_error("affinity_score_name: unknown score");
}

AffinityScore affinity_score_from_name(const std::string& name) {
    if (name == "l1") return AffinityScore::L1;
    if (name == "l2") return AffinityScore::L2;
    if (name == "l3") return AffinityScore::L3;
    if (name == "norm") return AffinityScore::EmbeddingNorm;
    throw std::invalid_argument("unknown affinity score: " + name);
}

BaselineKind baseline_from_name(const std::string& name) {
    if (name == "pinn-scratch") return BaselineKind::Scratch;
    if (name == "pinn-transfer") return BaselineKind::Transfer;
    if (name == "maml") return BaselineKind::MamlFirstOrder;
    throw std::invalid_argument("unknown baseline: " + name);
}

void ExperimentConfig::check_valid() const {
    if (schema_version != 1) throw std::invalid_argument("config: unsupported schema version");
    if (factors.empty()) throw std::invalid_argument("config: no factors");
    for (const FactorSpec& f : factors) f.check_valid();
    if (reference_values.size() != factors.size())
        throw std::invalid_argument("config: reference values must match factor count");
    if (arch.size() < 3) throw std::invalid_argument("config: arch needs at least 2 layers");
    const int dim = family == PdeFamily::Helmholtz2D ? 2 : 2;  // both families are 2-coordinate
    if (arch.front() != dim) throw std::invalid_argument("config: arch input dim mismatch");
    if (arch.back() != 1) throw std::invalid_argument("config: arch must end in one output");
    const int layers = static_cast<int>(arch.size()) - 1;
    if (split_depth < 1 || split_depth >= layers)
        throw std::invalid_argument("config: split_depth out of range");
    if (pretrain_epochs < 0 || m_interior < 0 || n_data < 0 || transfer_budget < 0 ||
        n_unseen < 0 || n_transfer_seeds < 1 || n1 < 0 || n2 < 0 || plan_epochs < 0)
        throw std::invalid_argument("config: negative budget");
    if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
    if (!(lambda_other > 0.0 && lambda_other <= lambda_main && lambda_main <= 1.0))
        throw std::invalid_argument("config: bad lambda constants");
    if (auto_k) {
        if (k_range.empty() || k_seeds < 2)
            throw std::invalid_argument("config: auto K needs a k_range and >= 2 seeds");
    } else if (k < 1) {
        throw std::invalid_argument("config: K must be >= 1");
    }
    if (ood_scale < 100.0) throw std::invalid_argument("config: ood_scale must be >= 100");
    if (domain_scale <= 0.0) throw std::invalid_argument("config: domain_scale must be positive");
    if (eval_grid < 2) throw std::invalid_argument("config: eval_grid too small");
    if (bootstrap_resamples < 1) throw std::invalid_argument("config: bootstrap_resamples");
    if (output_dir.empty()) throw std::invalid_argument("config: empty output_dir");
}

TaskConfig ExperimentConfig::reference_task() const {
    return TaskConfig::make(family, reference_values);
}

PdeProblem ExperimentConfig::make_problem(const TaskConfig& task) const {
    if (family == PdeFamily::Helmholtz2D) return PdeProblem::helmholtz(task, domain_scale);
    return PdeProblem::burgers(task);
}

namespace {

json factors_to_json(const std::vector<FactorSpec>& factors) {
    json arr = json::array();
    for (const FactorSpec& f : factors)
        arr.push_back({{"name", f.name}, {"min", f.min}, {"max", f.max}, {"levels", f.levels}});
    return arr;
}

std::vector<FactorSpec> factors_from_json(const json& arr) {
    std::vector<FactorSpec> factors;
    for (const json& j : arr) {
        FactorSpec f;
        f.name = j.at("name").get<std::string>();
        f.min = j.at("min").get<double>();
        f.max = j.at("max").get<double>();
        f.levels = j.at("levels").get<std::vector<double>>();
        factors.push_back(std::move(f));
    }
    return factors;
}

}  // namespace

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = name;
    j["family"] = family_name(family);
    j["factors"] = factors_to_json(factors);
    j["reference_values"] = reference_values;
    j["domain_scale"] = domain_scale;
    j["arch"] = arch;
    j["split_depth"] = split_depth;
    j["pretrain_epochs"] = pretrain_epochs;
    j["m_interior"] = m_interior;
    j["n_data"] = n_data;
    j["lr"] = lr;
    j["short_session"] = {{"budget_epochs", short_session.budget_epochs},
                          {"m_interior", short_session.m_interior},
                          {"n_data", short_session.n_data},
                          {"lr", short_session.lr}};
    j["k"] = k;
    j["auto_k"] = auto_k;
    j["k_range"] = k_range;
    j["k_seeds"] = k_seeds;
    j["n1"] = n1;
    j["n2"] = n2;
    j["plan_epochs"] = plan_epochs;
    j["lambda_main"] = lambda_main;
    j["lambda_other"] = lambda_other;
    j["transfer_budget"] = transfer_budget;
    j["n_unseen"] = n_unseen;
    j["n_transfer_seeds"] = n_transfer_seeds;
    j["ood_scale"] = ood_scale;
    j["parameter_only_embedding"] = parameter_only_embedding;
    j["random_metrics"] = random_metrics;
    j["fixed_lambda"] = fixed_lambda;
    json bl = json::array();
    for (BaselineKind b : baselines) bl.push_back(baseline_name(b));
    j["baselines"] = bl;
    j["maml_meta_iters"] = maml_meta_iters;
    j["maml_inner_steps"] = maml_inner_steps;
    j["group_score"] = affinity_score_name(group_score);
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["eval_grid"] = eval_grid;
    j["bootstrap_resamples"] = bootstrap_resamples;
    j["resume"] = resume;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != 1)
        throw std::invalid_argument("config: unsupported schema version " +
                                    std::to_string(c.schema_version));
    c.name = j.value("name", c.name);
    c.family = family_from_name(j.at("family").get<std::string>());
    c.factors = factors_from_json(j.at("factors"));
    c.reference_values = j.at("reference_values").get<std::vector<double>>();
    c.domain_scale = j.value("domain_scale", c.domain_scale);
    c.arch = j.at("arch").get<std::vector<int>>();
    c.split_depth = j.at("split_depth").get<int>();
    c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
    c.m_interior = j.value("m_interior", c.m_interior);
    c.n_data = j.value("n_data", c.n_data);
    c.lr = j.value("lr", c.lr);
    if (j.contains("short_session")) {
        const json& s = j["short_session"];
        c.short_session.budget_epochs = s.value("budget_epochs", c.short_session.budget_epochs);
        c.short_session.m_interior = s.value("m_interior", c.short_session.m_interior);
        c.short_session.n_data = s.value("n_data", c.short_session.n_data);
        c.short_session.lr = s.value("lr", c.short_session.lr);
    }
    c.k = j.value("k", c.k);
    c.auto_k = j.value("auto_k", c.auto_k);
    c.k_range = j.value("k_range", c.k_range);
    c.k_seeds = j.value("k_seeds", c.k_seeds);
    c.n1 = j.value("n1", c.n1);
    c.n2 = j.value("n2", c.n2);
    c.plan_epochs = j.value("plan_epochs", c.plan_epochs);
    c.lambda_main = j.value("lambda_main", c.lambda_main);
    c.lambda_other = j.value("lambda_other", c.lambda_other);
    c.transfer_budget = j.value("transfer_budget", c.transfer_budget);
    c.n_unseen = j.value("n_unseen", c.n_unseen);
    c.n_transfer_seeds = j.value("n_transfer_seeds", c.n_transfer_seeds);
    c.ood_scale = j.value("ood_scale", c.ood_scale);
    c.parameter_only_embedding = j.value("parameter_only_embedding", false);
    c.random_metrics = j.value("random_metrics", false);
    c.fixed_lambda = j.value("fixed_lambda", false);
    if (j.contains("baselines")) {
        c.baselines.clear();
        for (const json& b : j["baselines"]) c.baselines.push_back(baseline_from_name(b));
    }
    c.maml_meta_iters = j.value("maml_meta_iters", c.maml_meta_iters);
    c.maml_inner_steps = j.value("maml_inner_steps", c.maml_inner_steps);
    c.group_score = affinity_score_from_name(j.value("group_score", std::string("l3")));
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.eval_grid = j.value("eval_grid", c.eval_grid);
    c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
    c.resume = j.value("resume", false);
    c.check_valid();
    return c;
}

void ExperimentConfig::save_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("config: cannot write " + path);
    os << to_json_text() << "\n";
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot read " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

std::string ExperimentConfig::hash() const {
    const std::string text = to_json_text();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : text) {
        h ^= b;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
    auto helmholtz_factors = [] {
        return std::vector<FactorSpec>{{"A", 1.0, 13.0, {1.0, 7.0, 13.0}},
                                       {"B", 2.0, 12.0, {2.0, 7.0, 12.0}},
                                       {"C", 3.0, 11.0, {3.0, 7.0, 11.0}}};
    };

    ExperimentConfig c;
    c.name = name;
    if (name == "helmholtz-desk") {
        c.family = PdeFamily::Helmholtz2D;
        c.factors = helmholtz_factors();
        c.reference_values = {7.0, 7.0, 7.0};
        c.domain_scale = 0.1;
        c.arch = {2, 10, 10, 10, 10, 1};
        c.split_depth = 2;
        c.pretrain_epochs = 3000;
        c.m_interior = 100;
        c.n_data = 40;
        c.short_session = ShortSessionConfig{};
        c.short_session.budget_epochs = 50;
        c.short_session.m_interior = 49;
        c.short_session.n_data = 24;
        c.k = 3;
        c.n1 = 100;
        c.n2 = 100;
        c.plan_epochs = 18;
        c.transfer_budget = 400;
        c.n_unseen = 6;
        c.n_transfer_seeds = 3;
        c.eval_grid = 24;
        c.bootstrap_resamples = 2000;
    } else if (name == "helmholtz-paper") {
        c.family = PdeFamily::Helmholtz2D;
        c.factors = helmholtz_factors();
        c.reference_values = {7.0, 7.0, 7.0};
        c.domain_scale = 1.0;
        c.arch = {2, 10, 10, 10, 10, 1};
        c.split_depth = 2;
        c.pretrain_epochs = 20000;
        c.m_interior = 2500;
        c.n_data = 400;
        c.short_session.budget_epochs = 50;
        c.short_session.m_interior = 400;
        c.short_session.n_data = 80;
        c.k = 3;
        c.n1 = 100;
        c.n2 = 50;
        c.plan_epochs = 5;
        c.transfer_budget = 2000;
        c.n_unseen = 10;
        c.n_transfer_seeds = 5;
        c.eval_grid = 64;
        c.bootstrap_resamples = 10000;
    } else if (name == "burgers-paper") {
        c.family = PdeFamily::Burgers1D;
        c.factors = {{"alpha", 0.1, 2.0, {0.1, 1.05, 2.0}},
                     {"nu", 0.005, 0.5, {0.005, 0.2525, 0.5}},
                     {"A", 0.5, 10.0, {0.5, 5.25, 10.0}}};
        c.reference_values = {1.0, 0.03, 5.0};
        c.arch = {2, 20, 20, 20, 20, 20, 20, 20, 1};
        c.split_depth = 4;
        c.pretrain_epochs = 20000;
        c.m_interior = 2500;
        c.n_data = 400;
        c.short_session.budget_epochs = 50;
        c.short_session.m_interior = 400;
        c.short_session.n_data = 80;
        c.k = 5;
        c.n1 = 100;
        c.n2 = 50;
        c.plan_epochs = 5;
        c.transfer_budget = 2000;
        c.n_unseen = 10;
        c.n_transfer_seeds = 5;
        c.eval_grid = 64;
        c.bootstrap_resamples = 10000;
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    c.check_valid();
    return c;
}

}  // namespace lampinn
