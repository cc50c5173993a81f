#include "lampinn/jet_prop.hpp"

#include <cmath>

namespace lampinn {

Mat jet_seed_input(const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat ch = Mat::Zero(n, jet_channels(n));
    ch.col(0) = x;
    for (int k = 0; k < n; ++k) ch(k, 1 + k) = 1.0;
    return ch;
}

namespace {

// Per-unit channel maps for tanh. Channel layout: 0 = value,
// 1..n = first derivatives, 1+n+k*n+l = second derivative (k,l).
void tanh_channels(const Mat& z, Mat& a, int n) {
    a.resizeLike(z);
    const Eigen::ArrayXd t = z.col(0).array().tanh();
    const Eigen::ArrayXd t1 = 1.0 - t.square();
    const Eigen::ArrayXd t2 = -2.0 * t * t1;
    a.col(0) = t.matrix();
    for (int k = 0; k < n; ++k) a.col(1 + k) = (t1 * z.col(1 + k).array()).matrix();
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const int c = 1 + n + k * n + l;
            a.col(c) = (t2 * z.col(1 + k).array() * z.col(1 + l).array() + t1 * z.col(c).array()).matrix();
        }
}

void tanh_channels_backward(const Mat& z, const Mat& a_bar, Mat& z_bar, int n) {
    z_bar = Mat::Zero(z.rows(), z.cols());
    const Eigen::ArrayXd t = z.col(0).array().tanh();
    const Eigen::ArrayXd t1 = 1.0 - t.square();
    const Eigen::ArrayXd t2 = -2.0 * t * t1;
    const Eigen::ArrayXd t3 = -2.0 * t1 * (1.0 - 3.0 * t.square());

    Eigen::ArrayXd v_bar = a_bar.col(0).array() * t1;
    for (int k = 0; k < n; ++k) v_bar += a_bar.col(1 + k).array() * t2 * z.col(1 + k).array();
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            const int c = 1 + n + k * n + l;
            v_bar += a_bar.col(c).array() *
                     (t3 * z.col(1 + k).array() * z.col(1 + l).array() + t2 * z.col(c).array());
        }
    z_bar.col(0) = v_bar.matrix();

    for (int m = 0; m < n; ++m) {
        Eigen::ArrayXd g = a_bar.col(1 + m).array() * t1;
        for (int l = 0; l < n; ++l) {
            const int cml = 1 + n + m * n + l;
            const int clm = 1 + n + l * n + m;
            g += (a_bar.col(cml).array() + a_bar.col(clm).array()) * t2 * z.col(1 + l).array();
        }
        z_bar.col(1 + m) = g.matrix();
    }
    for (int c = 1 + n; c < z.cols(); ++c) z_bar.col(c) = (a_bar.col(c).array() * t1).matrix();
}

}  // namespace

Mat jet_tanh_channels(const Mat& z, int n_inputs) {
    Mat a;
    tanh_channels(z, a, n_inputs);
    return a;
}

Mat jet_tanh_channels_backward(const Mat& z, const Mat& a_bar, int n_inputs) {
    Mat z_bar;
    tanh_channels_backward(z, a_bar, z_bar, n_inputs);
    return z_bar;
}

JetTrace jet_forward(const DenseNet& net, const Mat& channels) {
    if (channels.rows() != net.input_dim())
        throw std::invalid_argument("jet_forward: channel rows must equal net input dim");
    const int C = static_cast<int>(channels.cols());
    int n = 0;
    while (jet_channels(n) < C) ++n;
    if (jet_channels(n) != C) throw std::invalid_argument("jet_forward: bad channel count");

    JetTrace trace;
    trace.n_inputs = n;
    trace.input = channels;
    const int L = net.num_layers();
    trace.frames.resize(L);
    const Mat* prev = &trace.input;
    for (int l = 0; l < L; ++l) {
        JetFrame& f = trace.frames[l];
        f.pre = net.weights[l] * (*prev);
        f.pre.col(0) += net.biases[l];
        if (!f.pre.allFinite()) throw std::runtime_error("jet_forward: non-finite intermediate at layer " + std::to_string(l));
        if (l + 1 < L)
            tanh_channels(f.pre, f.post, n);
        else
            f.post = f.pre;
        prev = &f.post;
    }
    return trace;
}

Mat jet_backward(const DenseNet& net, const JetTrace& trace, const Mat& out_bar, NetGrads& grads) {
    const int L = net.num_layers();
    const int n = trace.n_inputs;
    Mat a_bar = out_bar;
    for (int l = L - 1; l >= 0; --l) {
        Mat z_bar;
        if (l + 1 < L)
            tanh_channels_backward(trace.frames[l].pre, a_bar, z_bar, n);
        else
            z_bar = a_bar;
        const Mat& a_prev = (l == 0) ? trace.input : trace.frames[l - 1].post;
        grads.d_weights[l].noalias() += z_bar * a_prev.transpose();
        grads.d_biases[l] += z_bar.col(0);
        a_bar.noalias() = net.weights[l].transpose() * z_bar;
    }
    return a_bar;
}

EvalJet jet_extract(const JetTrace& trace, int out_index) {
    const Mat& out = trace.output();
    if (out_index < 0 || out_index >= out.rows()) throw std::invalid_argument("jet_extract: out_index out of range");
    const int n = trace.n_inputs;
    EvalJet jet;
    jet.value = out(out_index, 0);
    jet.d_input.resize(n);
    jet.d2_input.resize(n, n);
    for (int k = 0; k < n; ++k) jet.d_input[k] = out(out_index, 1 + k);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) jet.d2_input(k, l) = out(out_index, 1 + n + k * n + l);
    return jet;
}

}  // namespace lampinn

namespace lampinn {

EvalJet forward_jet(const DenseNet& net, const Vec& x, int out_index) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("forward_jet: input dim mismatch");
    JetTrace trace = jet_forward(net, jet_seed_input(x));
    return jet_extract(trace, out_index);
}

}  // namespace lampinn
