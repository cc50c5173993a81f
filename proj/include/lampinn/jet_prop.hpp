#ifndef LAMPINN_JET_PROP_HPP
#define LAMPINN_JET_PROP_HPP

#include "lampinn/dense_net.hpp"

namespace lampinn {

// Channel-based propagation of (value, first, second input derivatives)
// through a DenseNet. Activations are stored as (units x C) matrices with
// C = 1 + n + n*n columns: column 0 is the value, columns 1..n the first
// derivatives, then the full n x n second-derivative block row-major.
// Propagation is exact for tanh, so residual derivatives and the reverse
// pass below carry no truncation error.

struct JetFrame {
    Mat pre;   // pre-activation channels of each layer
    Mat post;  // post-activation channels
};

/// Full forward trace, needed by jet_backward.
struct JetTrace {
    int n_inputs = 0;
    Mat input;  // input channels
    std::vector<JetFrame> frames;

    const Mat& output() const { return frames.back().post; }
};

inline int jet_channels(int n_inputs) { return 1 + n_inputs + n_inputs * n_inputs; }

/// Seed the channel matrix for raw coordinates: value x, unit first
/// derivatives, zero second derivatives.
Mat jet_seed_input(const Vec& x);

/// Propagate input channels through the net. `channels` may come from
/// jet_seed_input or from the output of another net (modular composition);
/// in the latter case the derivative channels refer to the original inputs.
JetTrace jet_forward(const DenseNet& net, const Mat& channels);

/// Reverse pass: given dLoss/d(output channels), accumulate parameter
/// gradients into `grads` and return dLoss/d(input channels).
Mat jet_backward(const DenseNet& net, const JetTrace& trace, const Mat& out_bar, NetGrads& grads);

/// Extract the jet of a single output component from a forward trace.
EvalJet jet_extract(const JetTrace& trace, int out_index);

/// Elementwise tanh applied to a channel matrix (exact first/second
/// derivative propagation), and its reverse map. Used for activations that
/// sit outside any single DenseNet, such as a junction between nets.
Mat jet_tanh_channels(const Mat& z, int n_inputs);
Mat jet_tanh_channels_backward(const Mat& z, const Mat& a_bar, int n_inputs);

}  // namespace lampinn

#endif
