#include "lampinn/dense_net.hpp"

#include <cmath>
#include <random>

namespace lampinn {

std::int64_t DenseNet::num_params() const {
    std::int64_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

bool DenseNet::finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    }
    return true;
}

void DenseNet::check_valid() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("DenseNet: need at least 2 layer sizes");
    if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size())
        throw std::invalid_argument("DenseNet: layer count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l])
            throw std::invalid_argument("DenseNet: weight shape mismatch at layer " + std::to_string(l));
        if (biases[l].size() != layer_sizes[l + 1])
            throw std::invalid_argument("DenseNet: bias length mismatch at layer " + std::to_string(l));
    }
    if (!finite()) throw std::invalid_argument("DenseNet: non-finite parameters");
}

DenseNet DenseNet::zeros(const std::vector<int>& layer_sizes) {
    DenseNet net;
    net.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        net.weights.push_back(Mat::Zero(layer_sizes[l + 1], layer_sizes[l]));
        net.biases.push_back(Vec::Zero(layer_sizes[l + 1]));
    }
    net.check_valid();
    return net;
}

DenseNet DenseNet::xavier(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    DenseNet net = zeros(layer_sizes);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const double fan_in = static_cast<double>(layer_sizes[l]);
        const double fan_out = static_cast<double>(layer_sizes[l + 1]);
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < net.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < net.weights[l].cols(); ++j) net.weights[l](i, j) = dist(rng);
    }
    return net;
}

Vec DenseNet::forward(const Vec& x) const {
    if (x.size() != input_dim()) throw std::invalid_argument("DenseNet::forward: input dim mismatch");
    if (!x.allFinite()) throw std::invalid_argument("DenseNet::forward: non-finite input");
    Vec a = x;
    const int L = num_layers();
    for (int l = 0; l < L; ++l) {
        Vec z = weights[l] * a + biases[l];
        if (l + 1 < L)
            a = z.array().tanh().matrix();
        else
            a = std::move(z);
    }
    return a;
}

Vec layer_group_magnitudes(const DenseNet& net) {
    Vec out(net.num_layers());
    for (int l = 0; l < net.num_layers(); ++l) {
        out[l] = net.weights[l].size() > 0 ? net.weights[l].array().abs().mean() : 0.0;
    }
    return out;
}

ParamVector ParamVector::flatten(const DenseNet& net) {
    ParamVector pv;
    pv.values.resize(net.num_params());
    std::int64_t off = 0;
    for (int l = 0; l < net.num_layers(); ++l) {
        const Mat& W = net.weights[l];
        pv.blocks.push_back({off, W.rows(), W.cols()});
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) pv.values[off++] = W(i, j);
        const Vec& b = net.biases[l];
        pv.blocks.push_back({off, b.size(), 0});
        for (Eigen::Index i = 0; i < b.size(); ++i) pv.values[off++] = b[i];
    }
    return pv;
}

void ParamVector::unflatten_into(DenseNet& net) const {
    std::size_t blk = 0;
    for (int l = 0; l < net.num_layers(); ++l) {
        const Block& wb = blocks.at(blk++);
        Mat& W = net.weights[l];
        if (wb.rows != W.rows() || wb.cols != W.cols())
            throw std::invalid_argument("ParamVector: weight block shape mismatch");
        std::int64_t off = wb.offset;
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = values[off++];
        const Block& bb = blocks.at(blk++);
        if (bb.rows != net.biases[l].size())
            throw std::invalid_argument("ParamVector: bias block shape mismatch");
        for (Eigen::Index i = 0; i < net.biases[l].size(); ++i) net.biases[l][i] = values[bb.offset + i];
    }
}

NetGrads NetGrads::zeros_like(const DenseNet& net) {
    NetGrads g;
    for (int l = 0; l < net.num_layers(); ++l) {
        g.d_weights.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.d_biases.push_back(Vec::Zero(net.biases[l].size()));
    }
    return g;
}

void NetGrads::add_scaled(const NetGrads& other, double s) {
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        d_weights[l] += s * other.d_weights[l];
        d_biases[l] += s * other.d_biases[l];
    }
}

void NetGrads::apply_mask(const FreezeMask& mask) {
    if (mask.frozen.size() != d_weights.size())
        throw std::invalid_argument("FreezeMask: length must equal layer count");
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        if (mask.frozen[l]) {
            d_weights[l].setZero();
            d_biases[l].setZero();
        }
    }
}

Vec NetGrads::flatten() const {
    std::int64_t n = 0;
    for (std::size_t l = 0; l < d_weights.size(); ++l) n += d_weights[l].size() + d_biases[l].size();
    Vec out(n);
    std::int64_t off = 0;
    for (std::size_t l = 0; l < d_weights.size(); ++l) {
        const Mat& W = d_weights[l];
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            for (Eigen::Index j = 0; j < W.cols(); ++j) out[off++] = W(i, j);
        for (Eigen::Index i = 0; i < d_biases[l].size(); ++i) out[off++] = d_biases[l][i];
    }
    return out;
}

}  // namespace lampinn
