#ifndef LAMPINN_DENSE_NET_HPP
#define LAMPINN_DENSE_NET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lampinn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Hidden-layer nonlinearity. The output layer is always linear.
enum class Activation { Tanh };

/// Value plus exact first/second derivatives of one network output with
/// respect to the network inputs.
struct EvalJet {
    double value = 0.0;
    Vec d_input;   // length = input dim
    Mat d2_input;  // input dim x input dim, symmetric
};

/// Fully connected feed-forward network. weights[l] has shape
/// (layer_sizes[l+1] x layer_sizes[l]); hidden activations are tanh,
/// the final layer is affine.
struct DenseNet {
    std::vector<int> layer_sizes;
    std::vector<Mat> weights;
    std::vector<Vec> biases;
    Activation activation = Activation::Tanh;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
    std::int64_t num_params() const;

    bool finite() const;
    void check_valid() const;

    /// All parameters zero.
    static DenseNet zeros(const std::vector<int>& layer_sizes);
    /// Xavier-uniform weights, zero biases, deterministic in seed.
    static DenseNet xavier(const std::vector<int>& layer_sizes, std::uint64_t seed);

    Vec forward(const Vec& x) const;
};

EvalJet forward_jet(const DenseNet& net, const Vec& x, int out_index);

/// Per-layer mean |weight| (biases excluded).
Vec layer_group_magnitudes(const DenseNet& net);

/// Flat view of one or more DenseNets with enough layout information to
/// round-trip flatten -> unflatten exactly.
struct ParamVector {
    Vec values;

    struct Block {
        std::int64_t offset;
        std::int64_t rows;
        std::int64_t cols;  // 0 marks a bias block
    };
    std::vector<Block> blocks;

    static ParamVector flatten(const DenseNet& net);
    void unflatten_into(DenseNet& net) const;
};

/// Per-layer freeze flags; a frozen layer's weight and bias receive zero
/// gradient and therefore zero update.
struct FreezeMask {
    std::vector<bool> frozen;

    static FreezeMask none(int num_layers) { return {std::vector<bool>(num_layers, false)}; }
    static FreezeMask all(int num_layers) { return {std::vector<bool>(num_layers, true)}; }
};

/// Gradient container mirroring a DenseNet's parameter shapes.
struct NetGrads {
    std::vector<Mat> d_weights;
    std::vector<Vec> d_biases;

    static NetGrads zeros_like(const DenseNet& net);
    void add_scaled(const NetGrads& other, double s);
    void apply_mask(const FreezeMask& mask);
    Vec flatten() const;
};

}  // namespace lampinn

#endif
