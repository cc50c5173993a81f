#include "lampinn/baselines.hpp"

namespace lampinn {

std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Scratch: return "pinn-scratch";
        case BaselineKind::Transfer: return "pinn-transfer";
        case BaselineKind::MamlFirstOrder: return "maml";
    }
    throw std::logic_error("baseline_name: unknown kind");
}

BaselineResult train_scratch(const PdeProblem& problem, const CollocationSet& colloc,
                             const std::vector<int>& arch, int budget, std::uint64_t seed,
                             double lr, const ReferenceField* eval_field) {
    if (budget < 0) throw std::invalid_argument("train_scratch: negative budget");
    BaselineResult result;
    result.net = DenseNet::xavier(arch, seed);
    TrainOptions opts;
    opts.epochs = budget;
    opts.lr = lr;
    result.log = train_dense(result.net, problem, colloc, opts, eval_field);
    return result;
}

BaselineResult train_transfer(const DenseNet& pretrained, const PdeProblem& problem,
                              const CollocationSet& colloc, int budget, double lr,
                              const ReferenceField* eval_field) {
    if (budget < 0) throw std::invalid_argument("train_transfer: negative budget");
    BaselineResult result;
    result.net = pretrained;
    TrainOptions opts;
    opts.epochs = budget;
    opts.lr = lr;
    result.log = train_dense(result.net, problem, colloc, opts, eval_field);
    return result;
}

MamlResult maml_train(const std::vector<TaskConfig>& tasks, const std::vector<int>& arch,
                      const MamlOptions& opts, const ProblemFactory& factory) {
    if (tasks.size() < 2) throw std::invalid_argument("maml_train: need at least 2 tasks");
    if (opts.meta_iters < 0 || opts.inner_steps < 0)
        throw std::invalid_argument("maml_train: negative budget");

    MamlResult result;
    result.net = DenseNet::xavier(arch, opts.seed);
    Vec theta = ParamVector::flatten(result.net).values;
    OptimizerState outer = OptimizerState::adam(theta.size(), opts.lr);

    for (int iter = 0; iter < opts.meta_iters; ++iter) {
        const TaskConfig& task = tasks[static_cast<std::size_t>(iter) % tasks.size()];
        const PdeProblem problem = factory(task);
        const CollocationSet colloc =
            sample_collocation(problem, opts.m_interior, opts.n_data, mix_seed(opts.seed, task.id));

        // inner adaptation: plain gradient steps from the meta-point
        DenseNet adapted = result.net;
        ParamVector pv = ParamVector::flatten(adapted);
        bool bad = false;
        for (int step = 0; step < opts.inner_steps; ++step) {
            NetGrads g = NetGrads::zeros_like(adapted);
            const LossTerms lt = pinn_loss_grad(adapted, problem, colloc, g);
            if (step == 0) result.meta_losses.push_back(lt.total);
            if (lt.total > opts.divergence_threshold) {
                bad = true;
                break;
            }
            pv.values -= opts.lr * g.flatten();
            pv.unflatten_into(adapted);
        }
        if (bad) {
            result.diverged = true;
            return result;
        }

        // outer update: post-adaptation gradient applied at the meta-point
        NetGrads g = NetGrads::zeros_like(adapted);
        const LossTerms lt = pinn_loss_grad(adapted, problem, colloc, g);
        if (opts.inner_steps == 0) result.meta_losses.push_back(lt.total);
        if (lt.total > opts.divergence_threshold) {
            result.diverged = true;
            return result;
        }
        adam_step(outer, theta, g.flatten());
        ParamVector meta_pv = ParamVector::flatten(result.net);
        meta_pv.values = theta;
        meta_pv.unflatten_into(result.net);
    }
    return result;
}

BaselineResult maml_adapt(const DenseNet& meta_init, const PdeProblem& problem,
                          const CollocationSet& colloc, int budget, double lr,
                          const ReferenceField* eval_field) {
    return train_transfer(meta_init, problem, colloc, budget, lr, eval_field);
}

}  // namespace lampinn
