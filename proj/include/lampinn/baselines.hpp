#ifndef LAMPINN_BASELINES_HPP
#define LAMPINN_BASELINES_HPP

#include "lampinn/modular.hpp"

namespace lampinn {

enum class BaselineKind { Scratch, Transfer, MamlFirstOrder };

std::string baseline_name(BaselineKind kind);

struct BaselineResult {
    DenseNet net;
    TrainLog log;
};

/// Random-init PINN trained on one task.
BaselineResult train_scratch(const PdeProblem& problem, const CollocationSet& colloc,
                             const std::vector<int>& arch, int budget, std::uint64_t seed,
                             double lr = 2e-3, const ReferenceField* eval_field = nullptr);

/// Fine-tune a copy of the pretrained net on one task; the pretrained net
/// itself is never modified.
BaselineResult train_transfer(const DenseNet& pretrained, const PdeProblem& problem,
                              const CollocationSet& colloc, int budget, double lr = 2e-3,
                              const ReferenceField* eval_field = nullptr);

struct MamlOptions {
    int meta_iters = 100;
    int inner_steps = 1;
    double lr = 2e-3;  // shared by inner and outer updates
    int m_interior = 400;
    int n_data = 80;
    std::uint64_t seed = 0;
    double divergence_threshold = 1e12;
};

struct MamlResult {
    DenseNet net;                     // meta-initialization
    std::vector<double> meta_losses;  // pre-adaptation loss per meta-iteration
    bool diverged = false;
};

/// First-order MAML: per meta-iteration cycle to the next task, run
/// inner_steps plain gradient steps from the meta-point, then apply the
/// post-adaptation gradient to the meta-parameters with Adam. With
/// inner_steps = 0 this reduces to joint multi-task training.
MamlResult maml_train(const std::vector<TaskConfig>& tasks, const std::vector<int>& arch,
                      const MamlOptions& opts, const ProblemFactory& factory);

/// Transfer evaluation starting from the meta-initialization.
BaselineResult maml_adapt(const DenseNet& meta_init, const PdeProblem& problem,
                          const CollocationSet& colloc, int budget, double lr = 2e-3,
                          const ReferenceField* eval_field = nullptr);

}  // namespace lampinn

#endif
