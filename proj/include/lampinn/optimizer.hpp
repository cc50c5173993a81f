#ifndef LAMPINN_OPTIMIZER_HPP
#define LAMPINN_OPTIMIZER_HPP

#include "lampinn/dense_net.hpp"

namespace lampinn {

/// Reduce-on-plateau learning-rate schedule: if the loss fails to improve
/// by rel_tol for `patience` consecutive observations, lr <- max(lr*factor, lr_min).
struct PlateauSchedule {
    double factor = 0.5;
    int patience = 50;
    double lr_min = 1e-5;
    double rel_tol = 1e-4;

    double best_loss = std::numeric_limits<double>::infinity();
    int stall_count = 0;

    /// Observe a loss value; returns the (possibly reduced) learning rate.
    double observe(double loss, double lr);
};

/// Adam state with bias correction; accumulators are aligned with the flat
/// parameter vector they update.
struct OptimizerState {
    double lr = 2e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step_count = 0;
    Vec m;
    Vec v;
    PlateauSchedule schedule;

    static OptimizerState adam(std::int64_t n_params, double lr);
};

/// One Adam update of theta in place.
void adam_step(OptimizerState& state, Vec& theta, const Vec& grad);

/// Feed a loss observation to the plateau schedule, updating state.lr.
void plateau_schedule(OptimizerState& state, double loss);

}  // namespace lampinn

#endif
