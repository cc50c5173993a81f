#include "lampinn/modular.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

namespace lampinn {

namespace {

int channels_to_inputs(Eigen::Index c) {
    int n = 0;
    while (jet_channels(n) < c) ++n;
    if (jet_channels(n) != c) throw std::invalid_argument("modular jet: bad channel count");
    return n;
}

// Per-component flat layout with an optional per-cluster filter. Order:
// included cluster INs, then meta, then lambdas.
Eigen::Index flat_size(const ModularNet& net, const ModularUpdateScope& scope,
                       const std::vector<bool>& in_mask) {
    Eigen::Index n = 0;
    if (scope.cluster_ins)
        for (int j = 0; j < net.k(); ++j)
            if (in_mask[j]) n += net.in_cluster[j].num_params();
    if (scope.meta) n += net.meta.num_params();
    if (scope.lambdas) n += net.lambdas.size();
    return n;
}

Vec flatten_impl(const ModularNet& net, const ModularUpdateScope& scope,
                 const std::vector<bool>& in_mask) {
    Vec out(flat_size(net, scope, in_mask));
    Eigen::Index at = 0;
    auto put = [&](const Vec& v) {
        out.segment(at, v.size()) = v;
        at += v.size();
    };
    if (scope.cluster_ins)
        for (int j = 0; j < net.k(); ++j)
            if (in_mask[j]) put(ParamVector::flatten(net.in_cluster[j]).values);
    if (scope.meta) put(ParamVector::flatten(net.meta).values);
    if (scope.lambdas) put(net.lambdas);
    return out;
}

void unflatten_impl(const Vec& values, ModularNet& net, const ModularUpdateScope& scope,
                    const std::vector<bool>& in_mask) {
    if (values.size() != flat_size(net, scope, in_mask))
        throw std::invalid_argument("modular_unflatten: size mismatch");
    Eigen::Index at = 0;
    auto take_net = [&](DenseNet& target) {
        ParamVector pv = ParamVector::flatten(target);
        pv.values = values.segment(at, pv.values.size());
        at += pv.values.size();
        pv.unflatten_into(target);
    };
    if (scope.cluster_ins)
        for (int j = 0; j < net.k(); ++j)
            if (in_mask[j]) take_net(net.in_cluster[j]);
    if (scope.meta) take_net(net.meta);
    if (scope.lambdas) {
        net.lambdas = values.segment(at, net.lambdas.size());
        at += net.lambdas.size();
    }
}

Vec flatten_grads_impl(const ModularGrads& grads, const ModularNet& net,
                       const ModularUpdateScope& scope, const std::vector<bool>& in_mask) {
    Vec out(flat_size(net, scope, in_mask));
    Eigen::Index at = 0;
    auto put = [&](const Vec& v) {
        out.segment(at, v.size()) = v;
        at += v.size();
    };
    if (scope.cluster_ins)
        for (int j = 0; j < net.k(); ++j)
            if (in_mask[j]) put(grads.in_cluster[j].flatten());
    if (scope.meta) put(grads.meta.flatten());
    if (scope.lambdas) put(grads.d_lambdas);
    return out;
}

std::vector<bool> all_clusters(const ModularNet& net) {
    return std::vector<bool>(static_cast<std::size_t>(net.k()), true);
}

// Cyclic task iterator: round robin without replacement, reshuffled on wrap.
struct TaskCycle {
    const std::vector<TaskConfig>* tasks = nullptr;
    std::vector<std::size_t> order;
    std::size_t next = 0;

    const TaskConfig& draw(std::mt19937_64& rng) {
        if (next >= order.size()) {
            order.resize(tasks->size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), rng);
            next = 0;
        }
        return (*tasks)[order[next++]];
    }
};

}  // namespace

void ModularNet::check_valid() const {
    in0.check_valid();
    meta.check_valid();
    for (const DenseNet& n : in_cluster) {
        n.check_valid();
        if (n.layer_sizes != in0.layer_sizes)
            throw std::invalid_argument("ModularNet: cluster IN shape differs from in0");
    }
    if (meta.input_dim() != in0.output_dim())
        throw std::invalid_argument("ModularNet: meta input dim must equal IN output dim");
    if (lambdas.size() != k()) throw std::invalid_argument("ModularNet: lambda length must be K");
    if (split_depth != in0.num_layers())
        throw std::invalid_argument("ModularNet: split_depth must equal in0 layer count");
}

Vec ModularNet::forward(const Vec& x) const {
    Vec h = in0.forward(x);
    for (int j = 0; j < k(); ++j) h += lambdas[j] * in_cluster[j].forward(x);
    return meta.forward(h.array().tanh().matrix());
}

ModularNet split_pretrained(const DenseNet& pretrained, int split_depth, int k, std::uint64_t seed,
                            double lambda_init) {
    pretrained.check_valid();
    const int total = pretrained.num_layers();
    if (split_depth < 1 || split_depth >= total)
        throw std::invalid_argument("split_pretrained: split_depth must be in [1, layers)");
    if (k < 0) throw std::invalid_argument("split_pretrained: K must be >= 0");

    ModularNet net;
    net.split_depth = split_depth;
    net.in0.layer_sizes.assign(pretrained.layer_sizes.begin(),
                               pretrained.layer_sizes.begin() + split_depth + 1);
    net.in0.weights.assign(pretrained.weights.begin(), pretrained.weights.begin() + split_depth);
    net.in0.biases.assign(pretrained.biases.begin(), pretrained.biases.begin() + split_depth);
    net.meta.layer_sizes.assign(pretrained.layer_sizes.begin() + split_depth,
                                pretrained.layer_sizes.end());
    net.meta.weights.assign(pretrained.weights.begin() + split_depth, pretrained.weights.end());
    net.meta.biases.assign(pretrained.biases.begin() + split_depth, pretrained.biases.end());
    net.in_cluster.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        net.in_cluster.push_back(
            DenseNet::xavier(net.in0.layer_sizes, mix_seed(seed, static_cast<std::uint64_t>(j))));
    net.lambdas = Vec::Constant(k, lambda_init);
    net.check_valid();
    return net;
}

DenseNet reassemble(const DenseNet& input_net, const DenseNet& meta) {
    if (input_net.output_dim() != meta.input_dim())
        throw std::invalid_argument("reassemble: junction dims differ");
    DenseNet out;
    out.layer_sizes = input_net.layer_sizes;
    out.layer_sizes.insert(out.layer_sizes.end(), meta.layer_sizes.begin() + 1,
                           meta.layer_sizes.end());
    out.weights = input_net.weights;
    out.weights.insert(out.weights.end(), meta.weights.begin(), meta.weights.end());
    out.biases = input_net.biases;
    out.biases.insert(out.biases.end(), meta.biases.begin(), meta.biases.end());
    out.check_valid();
    return out;
}

ModularGrads ModularGrads::zeros_like(const ModularNet& net) {
    ModularGrads g;
    g.in0 = NetGrads::zeros_like(net.in0);
    g.in_cluster.reserve(net.in_cluster.size());
    for (const DenseNet& n : net.in_cluster) g.in_cluster.push_back(NetGrads::zeros_like(n));
    g.meta = NetGrads::zeros_like(net.meta);
    g.d_lambdas = Vec::Zero(net.lambdas.size());
    return g;
}

ModularTrace modular_jet_forward(const ModularNet& net, const Mat& channels) {
    const int n = channels_to_inputs(channels.cols());
    ModularTrace trace;
    trace.t0 = jet_forward(net.in0, channels);
    trace.h_pre = trace.t0.output();
    trace.tj.reserve(net.in_cluster.size());
    for (int j = 0; j < net.k(); ++j) {
        trace.tj.push_back(jet_forward(net.in_cluster[j], channels));
        trace.h_pre += net.lambdas[j] * trace.tj.back().output();
    }
    trace.tmeta = jet_forward(net.meta, jet_tanh_channels(trace.h_pre, n));
    return trace;
}

void modular_jet_backward(const ModularNet& net, const ModularTrace& trace, const Mat& out_bar,
                          ModularGrads& grads) {
    const int n = trace.tmeta.n_inputs;
    const Mat h_bar = jet_backward(net.meta, trace.tmeta, out_bar, grads.meta);
    const Mat pre_bar = jet_tanh_channels_backward(trace.h_pre, h_bar, n);
    jet_backward(net.in0, trace.t0, pre_bar, grads.in0);
    for (int j = 0; j < net.k(); ++j) {
        const Mat branch_bar = net.lambdas[j] * pre_bar;
        jet_backward(net.in_cluster[j], trace.tj[j], branch_bar, grads.in_cluster[j]);
        grads.d_lambdas[j] += pre_bar.cwiseProduct(trace.tj[j].output()).sum();
    }
}

EvalJet modular_forward_jet(const ModularNet& net, const Vec& x, int out_index) {
    if (x.size() != net.input_dim())
        throw std::invalid_argument("modular_forward_jet: input dim mismatch");
    ModularTrace trace = modular_jet_forward(net, jet_seed_input(x));
    return jet_extract(trace.tmeta, out_index);
}

LossTerms modular_pinn_loss(const ModularNet& net, const PdeProblem& problem,
                            const CollocationSet& colloc) {
    return pinn_loss(ModularFieldModel(net), problem, colloc);
}

LossTerms modular_pinn_loss_grad(const ModularNet& net, const PdeProblem& problem,
                                 const CollocationSet& colloc, ModularGrads& grads) {
    LossTerms terms;
    const int n = problem.dim();

    if (!colloc.data.empty()) {
        const double inv_n = 1.0 / static_cast<double>(colloc.data.size());
        double acc = 0.0;
        for (const auto& [x, target] : colloc.data) {
            Mat ch = Mat::Zero(x.size(), 1);  // value-only channel
            ch.col(0) = x;
            ModularTrace trace = modular_jet_forward(net, ch);
            const double d = trace.tmeta.output()(0, 0) - target;
            acc += d * d;
            Mat out_bar = Mat::Zero(net.output_dim(), 1);
            out_bar(0, 0) = 2.0 * d * inv_n;
            modular_jet_backward(net, trace, out_bar, grads);
        }
        terms.data = acc * inv_n;
    }

    if (!colloc.interior.empty()) {
        const double inv_m = 1.0 / static_cast<double>(colloc.interior.size());
        double acc = 0.0;
        for (const Vec& x : colloc.interior) {
            ModularTrace trace = modular_jet_forward(net, jet_seed_input(x));
            const EvalJet jet = jet_extract(trace.tmeta, 0);
            const double r = problem.residual(jet, x);
            acc += r * r;
            double dv;
            Vec dd1;
            Mat dd2;
            problem.residual_partials(jet, x, dv, dd1, dd2);
            const double w = 2.0 * r * inv_m;
            Mat out_bar = Mat::Zero(net.output_dim(), jet_channels(n));
            out_bar(0, 0) = w * dv;
            for (int k = 0; k < n; ++k) out_bar(0, 1 + k) = w * dd1[k];
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) out_bar(0, 1 + n + k * n + l) = w * dd2(k, l);
            modular_jet_backward(net, trace, out_bar, grads);
        }
        terms.physics = acc * inv_m;
    }

    terms.total = terms.data + terms.physics;
    if (!std::isfinite(terms.total))
        throw std::runtime_error("modular_pinn_loss_grad: non-finite loss");
    return terms;
}

Vec modular_flatten(const ModularNet& net, const ModularUpdateScope& scope) {
    return flatten_impl(net, scope, all_clusters(net));
}

void modular_unflatten(const Vec& values, ModularNet& net, const ModularUpdateScope& scope) {
    unflatten_impl(values, net, scope, all_clusters(net));
}

Vec modular_flatten_grads(const ModularGrads& grads, const ModularNet& net,
                          const ModularUpdateScope& scope) {
    return flatten_grads_impl(grads, net, scope, all_clusters(net));
}

void TrainingPlan::check_valid() const {
    if (n1 < 0 || n2 < 0 || epochs < 0) throw std::invalid_argument("TrainingPlan: negative budget");
    if (!(lambda_other > 0.0 && lambda_other <= lambda_main && lambda_main <= 1.0))
        throw std::invalid_argument("TrainingPlan: need 0 < lambda_other <= lambda_main <= 1");
    if (lr <= 0.0) throw std::invalid_argument("TrainingPlan: lr must be positive");
    if (m_interior < 0 || n_data < 0) throw std::invalid_argument("TrainingPlan: negative points");
}

PhaseLog phase1_train(ModularNet& net, const std::vector<std::vector<TaskConfig>>& clusters,
                      const TrainingPlan& plan, const ProblemFactory& factory) {
    plan.check_valid();
    net.check_valid();
    if (static_cast<int>(clusters.size()) != net.k())
        throw std::invalid_argument("phase1_train: cluster count must equal K");
    for (const auto& c : clusters)
        if (c.empty()) throw std::invalid_argument("phase1_train: empty cluster");

    PhaseLog log;
    std::mt19937_64 rng(plan.seed);
    std::vector<TaskCycle> cycles(clusters.size());
    for (std::size_t j = 0; j < clusters.size(); ++j) cycles[j].tasks = &clusters[j];

    const ModularUpdateScope scope{true, true, false};
    OptimizerState shared_opt;
    Vec theta;
    if (!plan.phase1_main_only) {
        theta = modular_flatten(net, scope);
        shared_opt = OptimizerState::adam(theta.size(), plan.lr);
    }

    for (int epoch = 0; epoch < plan.epochs; ++epoch) {
        for (int j = 0; j < net.k(); ++j) {
            const TaskConfig& task = cycles[static_cast<std::size_t>(j)].draw(rng);
            const PdeProblem problem = factory(task);
            const CollocationSet colloc = sample_collocation(
                problem, plan.m_interior, plan.n_data, mix_seed(plan.seed, task.id));
            for (int i = 0; i < net.k(); ++i)
                net.lambdas[i] = (i == j) ? plan.lambda_main : plan.lambda_other;

            std::vector<bool> in_mask = plan.phase1_main_only
                                            ? std::vector<bool>(clusters.size(), false)
                                            : all_clusters(net);
            OptimizerState segment_opt;
            if (plan.phase1_main_only) {
                in_mask[static_cast<std::size_t>(j)] = true;
                theta = flatten_impl(net, scope, in_mask);
                segment_opt = OptimizerState::adam(theta.size(), plan.lr);
            }
            OptimizerState& opt = plan.phase1_main_only ? segment_opt : shared_opt;

            bool diverged = false;
            for (int step = 0; step < plan.n1; ++step) {
                ModularGrads grads = ModularGrads::zeros_like(net);
                const LossTerms lt = modular_pinn_loss_grad(net, problem, colloc, grads);
                log.losses.push_back(lt.total);
                if (lt.total > plan.divergence_threshold) {
                    diverged = true;
                    break;
                }
                adam_step(opt, theta, flatten_grads_impl(grads, net, scope, in_mask));
                unflatten_impl(theta, net, scope, in_mask);
            }
            if (diverged) log.diverged_clusters.push_back(j);
        }
    }
    return log;
}

PhaseLog phase2_train(ModularNet& net, const std::vector<std::vector<TaskConfig>>& clusters,
                      const TrainingPlan& plan, const ProblemFactory& factory) {
    plan.check_valid();
    net.check_valid();
    if (static_cast<int>(clusters.size()) != net.k())
        throw std::invalid_argument("phase2_train: cluster count must equal K");
    for (const auto& c : clusters)
        if (c.empty()) throw std::invalid_argument("phase2_train: empty cluster");

    PhaseLog log;
    std::mt19937_64 rng(mix_seed(plan.seed, 0x70683264ULL));
    std::vector<TaskCycle> cycles(clusters.size());
    for (std::size_t j = 0; j < clusters.size(); ++j) cycles[j].tasks = &clusters[j];

    const ModularUpdateScope scope{false, true, false};  // meta only
    Vec theta = modular_flatten(net, scope);
    OptimizerState opt = OptimizerState::adam(theta.size(), plan.lr);

    for (int iter = 0; iter < plan.n2; ++iter) {
        ModularGrads grads = ModularGrads::zeros_like(net);
        double summed = 0.0;
        for (int j = 0; j < net.k(); ++j) {
            const TaskConfig& task = cycles[static_cast<std::size_t>(j)].draw(rng);
            const PdeProblem problem = factory(task);
            const CollocationSet colloc = sample_collocation(
                problem, plan.m_interior, plan.n_data, mix_seed(plan.seed, task.id));
            for (int i = 0; i < net.k(); ++i)
                net.lambdas[i] = (i == j) ? plan.lambda_main : plan.lambda_other;
            summed += modular_pinn_loss_grad(net, problem, colloc, grads).total;
        }
        log.losses.push_back(summed);
        if (summed > plan.divergence_threshold) {
            log.diverged_clusters.push_back(-1);
            return log;
        }
        adam_step(opt, theta, modular_flatten_grads(grads, net, scope));
        modular_unflatten(theta, net, scope);
    }
    return log;
}

TransferSession transfer_adapt(const ModularNet& trained, const PdeProblem& problem,
                               const CollocationSet& colloc, const TransferOptions& opts,
                               const ReferenceField* eval_field) {
    if (opts.budget < 0) throw std::invalid_argument("transfer_adapt: negative budget");
    TransferSession session;
    session.net = trained;
    ModularNet& net = session.net;
    net.lambdas = Vec::Constant(net.k(), opts.lambda_init);

    ModularUpdateScope scope{true, true, !opts.fixed_lambda};
    Vec theta = modular_flatten(net, scope);
    OptimizerState opt = OptimizerState::adam(theta.size(), opts.lr);

    session.lambda_history.resize(opts.budget + 1, net.k());
    auto record = [&](int row, double loss) {
        session.losses.push_back(loss);
        session.lambda_history.row(row) = net.lambdas.transpose();
        if (eval_field) session.mses.push_back(mse_on_grid(ModularFieldModel(net), *eval_field));
    };

    for (int epoch = 0; epoch < opts.budget; ++epoch) {
        ModularGrads grads = ModularGrads::zeros_like(net);
        const LossTerms lt = modular_pinn_loss_grad(net, problem, colloc, grads);
        record(epoch, lt.total);
        if (lt.total > opts.divergence_threshold) {
            session.diverged = true;
            session.lambda_history.conservativeResize(epoch + 1, net.k());
            return session;
        }
        adam_step(opt, theta, modular_flatten_grads(grads, net, scope));
        modular_unflatten(theta, net, scope);
        if (!opts.fixed_lambda) {
            for (int j = 0; j < net.k(); ++j)
                net.lambdas[j] = std::clamp(net.lambdas[j], 0.0, 1.0);
            theta.tail(net.k()) = net.lambdas;
        }
    }
    record(opts.budget, modular_pinn_loss(net, problem, colloc).total);
    return session;
}

std::vector<double> layer_freeze_experiment(const DenseNet& net, const FreezeMask& mask,
                                            const PdeProblem& problem,
                                            const CollocationSet& colloc, int budget, double lr,
                                            const ReferenceField& eval_field) {
    DenseNet copy = net;
    TrainOptions opts;
    opts.epochs = budget;
    opts.lr = lr;
    opts.mask = &mask;
    TrainLog log = train_dense(copy, problem, colloc, opts, &eval_field);
    return log.mses;
}

namespace {

constexpr char kMagic[6] = {'L', 'A', 'M', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void put(std::ostream& os, T v) {
    put_bytes(os, &v, sizeof(T));
}
void put_sizes(std::ostream& os, const std::vector<int>& sizes) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(sizes.size()));
    for (int s : sizes) put<std::int32_t>(os, s);
}
void put_net_params(std::ostream& os, const DenseNet& net) {
    const Vec v = ParamVector::flatten(net).values;
    put_bytes(os, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is)
        throw std::runtime_error("checkpoint: truncated at byte offset " +
                                 std::to_string(static_cast<long long>(is.gcount())));
}
template <typename T>
T get(std::istream& is) {
    T v;
    const auto at = is.tellg();
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw std::runtime_error("checkpoint: truncated at byte offset " +
                                 std::to_string(static_cast<long long>(at)));
    return v;
}
std::vector<int> get_sizes(std::istream& is) {
    const std::uint32_t n = get<std::uint32_t>(is);
    if (n > 1000) throw std::runtime_error("checkpoint: implausible layer count");
    std::vector<int> sizes(n);
    for (std::uint32_t i = 0; i < n; ++i) sizes[i] = get<std::int32_t>(is);
    return sizes;
}
void get_net_params(std::istream& is, DenseNet& net) {
    ParamVector pv = ParamVector::flatten(net);
    const auto at = is.tellg();
    is.read(reinterpret_cast<char*>(pv.values.data()),
            static_cast<std::streamsize>(sizeof(double) * pv.values.size()));
    if (!is)
        throw std::runtime_error("checkpoint: truncated parameter block at byte offset " +
                                 std::to_string(static_cast<long long>(at)));
    pv.unflatten_into(net);
}

void check_header(std::istream& is) {
    char magic[6];
    get_bytes(is, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("checkpoint: bad magic at byte offset 0");
    const std::uint32_t version = get<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
}

}  // namespace

void write_modular_checkpoint(std::ostream& os, const ModularNet& net, std::uint64_t seed,
                              const std::vector<int>& cluster_assignments) {
    net.check_valid();
    put_bytes(os, kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    put<std::uint8_t>(os, 1);  // kind: modular
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.k()));
    put<std::int32_t>(os, net.split_depth);
    put_sizes(os, net.in0.layer_sizes);
    put_sizes(os, net.meta.layer_sizes);
    put_net_params(os, net.in0);
    for (const DenseNet& n : net.in_cluster) put_net_params(os, n);
    put_net_params(os, net.meta);
    put_bytes(os, net.lambdas.data(), sizeof(double) * static_cast<std::size_t>(net.lambdas.size()));
    put<std::uint64_t>(os, seed);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(cluster_assignments.size()));
    for (int a : cluster_assignments) put<std::int32_t>(os, a);
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

ModularNet read_modular_checkpoint(std::istream& is, std::uint64_t* seed,
                                   std::vector<int>* cluster_assignments) {
    check_header(is);
    if (get<std::uint8_t>(is) != 1) throw std::runtime_error("checkpoint: not a modular record");
    const std::uint32_t k = get<std::uint32_t>(is);
    if (k > 10000) throw std::runtime_error("checkpoint: implausible K");
    ModularNet net;
    net.split_depth = get<std::int32_t>(is);
    const std::vector<int> in_sizes = get_sizes(is);
    const std::vector<int> meta_sizes = get_sizes(is);
    net.in0 = DenseNet::zeros(in_sizes);
    net.meta = DenseNet::zeros(meta_sizes);
    net.in_cluster.assign(k, DenseNet::zeros(in_sizes));
    get_net_params(is, net.in0);
    for (DenseNet& n : net.in_cluster) get_net_params(is, n);
    get_net_params(is, net.meta);
    net.lambdas.resize(k);
    get_bytes(is, net.lambdas.data(), sizeof(double) * k);
    const std::uint64_t s = get<std::uint64_t>(is);
    if (seed) *seed = s;
    const std::uint32_t n_assign = get<std::uint32_t>(is);
    if (n_assign > 1000000) throw std::runtime_error("checkpoint: implausible assignment count");
    std::vector<int> assign(n_assign);
    for (std::uint32_t i = 0; i < n_assign; ++i) assign[i] = get<std::int32_t>(is);
    if (cluster_assignments) *cluster_assignments = std::move(assign);
    net.check_valid();
    return net;
}

void write_dense_checkpoint(std::ostream& os, const DenseNet& net, std::uint64_t seed) {
    net.check_valid();
    put_bytes(os, kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kVersion);
    put<std::uint8_t>(os, 0);  // kind: dense, K=0 marker follows
    put<std::uint32_t>(os, 0);
    put_sizes(os, net.layer_sizes);
    put_net_params(os, net);
    put<std::uint64_t>(os, seed);
    if (!os) throw std::runtime_error("checkpoint: write failed");
}

DenseNet read_dense_checkpoint(std::istream& is, std::uint64_t* seed) {
    check_header(is);
    if (get<std::uint8_t>(is) != 0) throw std::runtime_error("checkpoint: not a dense record");
    if (get<std::uint32_t>(is) != 0) throw std::runtime_error("checkpoint: dense record with K != 0");
    DenseNet net = DenseNet::zeros(get_sizes(is));
    get_net_params(is, net);
    const std::uint64_t s = get<std::uint64_t>(is);
    if (seed) *seed = s;
    return net;
}

}  // namespace lampinn
