#include "lampinn/optimizer.hpp"

#include <cmath>

namespace lampinn {

double PlateauSchedule::observe(double loss, double lr) {
    if (!std::isfinite(loss)) throw std::invalid_argument("PlateauSchedule: non-finite loss");
    if (!std::isfinite(best_loss) || loss < best_loss - rel_tol * std::abs(best_loss)) {
        best_loss = loss;
        stall_count = 0;
        return lr;
    }
    if (++stall_count > patience) {
        stall_count = 0;
        return std::max(lr * factor, lr_min);
    }
    return lr;
}

OptimizerState OptimizerState::adam(std::int64_t n_params, double lr_) {
    OptimizerState s;
    s.lr = lr_;
    s.m = Vec::Zero(n_params);
    s.v = Vec::Zero(n_params);
    return s;
}

void adam_step(OptimizerState& state, Vec& theta, const Vec& grad) {
    if (theta.size() != grad.size() || theta.size() != state.m.size())
        throw std::invalid_argument("adam_step: length mismatch");
    ++state.step_count;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v.array().matrix() + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    theta.array() -= state.lr * (state.m.array() / bc1) /
                     ((state.v.array() / bc2).sqrt() + state.epsilon);
}

void plateau_schedule(OptimizerState& state, double loss) {
    state.lr = state.schedule.observe(loss, state.lr);
}

}  // namespace lampinn
