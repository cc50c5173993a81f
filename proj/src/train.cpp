#include "lampinn/train.hpp"

namespace lampinn {

TrainLog train_dense(DenseNet& net, const PdeProblem& problem, const CollocationSet& colloc,
                     const TrainOptions& opts, const ReferenceField* eval_field) {
    TrainLog log;
    ParamVector pv = ParamVector::flatten(net);
    OptimizerState opt = OptimizerState::adam(pv.values.size(), opts.lr);

    auto record_mse = [&]() {
        if (eval_field) log.mses.push_back(mse_on_grid(DenseFieldModel(net), *eval_field));
    };

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        NetGrads grads = NetGrads::zeros_like(net);
        const LossTerms lt = pinn_loss_grad(net, problem, colloc, grads, opts.mask);
        log.losses.push_back(lt.total);
        record_mse();
        if (lt.total > opts.divergence_threshold) {
            log.diverged = true;
            return log;
        }
        if (opts.use_plateau) plateau_schedule(opt, lt.total);
        adam_step(opt, pv.values, grads.flatten());
        pv.unflatten_into(net);
    }
    log.losses.push_back(pinn_loss(DenseFieldModel(net), problem, colloc).total);
    record_mse();
    return log;
}

}  // namespace lampinn
