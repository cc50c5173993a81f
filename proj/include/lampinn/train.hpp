#ifndef LAMPINN_TRAIN_HPP
#define LAMPINN_TRAIN_HPP

#include "lampinn/optimizer.hpp"
#include "lampinn/pde.hpp"

namespace lampinn {

struct TrainOptions {
    int epochs = 0;
    double lr = 2e-3;
    bool use_plateau = true;
    double divergence_threshold = 1e12;
    const FreezeMask* mask = nullptr;
};

struct TrainLog {
    // losses[i] is the total loss after i optimizer steps (losses[0] is the
    // initial loss); mses parallel when an eval field is supplied.
    std::vector<double> losses;
    std::vector<double> mses;
    bool diverged = false;

    double initial_loss() const { return losses.front(); }
    double final_loss() const { return losses.back(); }
};

/// Full-batch Adam on the composite PINN loss; one epoch = one step.
TrainLog train_dense(DenseNet& net, const PdeProblem& problem, const CollocationSet& colloc,
                     const TrainOptions& opts, const ReferenceField* eval_field = nullptr);

}  // namespace lampinn

#endif
