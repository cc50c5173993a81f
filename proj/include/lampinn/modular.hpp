#ifndef LAMPINN_MODULAR_HPP
#define LAMPINN_MODULAR_HPP

#include "lampinn/jet_prop.hpp"
#include "lampinn/train.hpp"

#include <functional>
#include <iosfwd>

namespace lampinn {

/// Modular network: a frozen reference input net in0, K cluster input nets,
/// and a shared meta net. Forward pass:
///   h = tanh(in0(x) + sum_j lambda_j * in_cluster[j](x)),  u = meta(h).
/// The junction tanh is the activation the reference net applied at the
/// split layer, so with all cluster contributions zero the modular forward
/// reproduces the reassembled pretrained net exactly.
struct ModularNet {
    DenseNet in0;
    std::vector<DenseNet> in_cluster;
    DenseNet meta;
    Vec lambdas;
    int split_depth = 0;

    int k() const { return static_cast<int>(in_cluster.size()); }
    int input_dim() const { return in0.input_dim(); }
    int output_dim() const { return meta.output_dim(); }

    void check_valid() const;
    Vec forward(const Vec& x) const;
};

/// Cut a pretrained net at layer split_depth: the first split_depth weight
/// layers become in0, the rest the meta net. K fresh cluster nets share
/// in0's shape; lambdas start at lambda_init.
ModularNet split_pretrained(const DenseNet& pretrained, int split_depth, int k, std::uint64_t seed,
                            double lambda_init = 0.1);

/// Concatenate an input net and a meta net back into one plain DenseNet.
/// The junction tanh becomes a hidden activation of the combined net.
DenseNet reassemble(const DenseNet& input_net, const DenseNet& meta);

struct ModularGrads {
    NetGrads in0;
    std::vector<NetGrads> in_cluster;
    NetGrads meta;
    Vec d_lambdas;

    static ModularGrads zeros_like(const ModularNet& net);
};

struct ModularTrace {
    JetTrace t0;
    std::vector<JetTrace> tj;
    Mat h_pre;  // junction pre-activation channels
    JetTrace tmeta;
};

ModularTrace modular_jet_forward(const ModularNet& net, const Mat& channels);

/// Reverse pass through meta, junction tanh, and all input nets.
/// Accumulates parameter and lambda gradients.
void modular_jet_backward(const ModularNet& net, const ModularTrace& trace, const Mat& out_bar,
                          ModularGrads& grads);

EvalJet modular_forward_jet(const ModularNet& net, const Vec& x, int out_index = 0);

class ModularFieldModel final : public FieldModel {
   public:
    explicit ModularFieldModel(const ModularNet& net) : net_(net) {}
    double eval(const Vec& x) const override { return net_.forward(x)[0]; }
    EvalJet eval_jet(const Vec& x) const override { return modular_forward_jet(net_, x, 0); }

   private:
    const ModularNet& net_;
};

/// Which parameter blocks a modular training phase updates. in0 is never
/// trainable; lambdas only during transfer.
struct ModularUpdateScope {
    bool cluster_ins = false;
    bool meta = false;
    bool lambdas = false;
};

LossTerms modular_pinn_loss(const ModularNet& net, const PdeProblem& problem,
                            const CollocationSet& colloc);
LossTerms modular_pinn_loss_grad(const ModularNet& net, const PdeProblem& problem,
                                 const CollocationSet& colloc, ModularGrads& grads);

/// Flat parameter layout: cluster IN blocks in order, then meta, then
/// lambdas when in scope. in0 is excluded (always frozen).
Vec modular_flatten(const ModularNet& net, const ModularUpdateScope& scope);
void modular_unflatten(const Vec& values, ModularNet& net, const ModularUpdateScope& scope);
Vec modular_flatten_grads(const ModularGrads& grads, const ModularNet& net,
                          const ModularUpdateScope& scope);

struct TrainingPlan {
    int n1 = 100;
    int n2 = 50;
    int epochs = 1;
    double lambda_main = 1.0;
    double lambda_other = 0.1;
    double lr = 2e-3;
    int m_interior = 400;
    int n_data = 80;
    std::uint64_t seed = 0;
    double divergence_threshold = 1e12;
    // Restrict phase-1 updates to the active cluster's IN plus the meta net
    // instead of updating every cluster IN.
    bool phase1_main_only = false;

    void check_valid() const;
};

using ProblemFactory = std::function<PdeProblem(const TaskConfig&)>;

struct PhaseLog {
    std::vector<double> losses;          // one entry per optimizer step
    std::vector<int> diverged_clusters;  // clusters whose segment diverged
};

/// Algorithm phase 1: per cluster, route with lambda_main on the active
/// branch, run n1 steps per sampled task. Tasks rotate round robin within
/// each cluster, reshuffled per epoch. in0 stays frozen throughout.
PhaseLog phase1_train(ModularNet& net, const std::vector<std::vector<TaskConfig>>& clusters,
                      const TrainingPlan& plan, const ProblemFactory& factory);

/// Algorithm phase 2: all input nets frozen; n2 iterations of a meta-only
/// step on the sum of per-cluster losses.
PhaseLog phase2_train(ModularNet& net, const std::vector<std::vector<TaskConfig>>& clusters,
                      const TrainingPlan& plan, const ProblemFactory& factory);

struct TransferOptions {
    int budget = 100;
    double lr = 2e-3;
    double lambda_init = 0.5;
    bool fixed_lambda = false;  // ablation: keep lambda at lambda_init
    double divergence_threshold = 1e12;
};

struct TransferSession {
    ModularNet net;
    std::vector<double> losses;  // losses[i] after i steps
    std::vector<double> mses;    // parallel when a reference is supplied
    Mat lambda_history;          // (epochs+1) x K, row i after i steps
    bool diverged = false;

    double final_mse() const { return mses.back(); }
};

/// Adapt a trained modular net to an unseen task: lambdas restart at
/// lambda_init and every step updates all input nets, the meta net, and
/// lambda with one shared Adam instance, then clips lambda to [0,1].
TransferSession transfer_adapt(const ModularNet& trained, const PdeProblem& problem,
                               const CollocationSet& colloc, const TransferOptions& opts,
                               const ReferenceField* eval_field = nullptr);

/// Fine-tune a plain net under a per-layer freeze mask; returns the
/// epoch-wise grid MSE trajectory.
std::vector<double> layer_freeze_experiment(const DenseNet& net, const FreezeMask& mask,
                                            const PdeProblem& problem,
                                            const CollocationSet& colloc, int budget, double lr,
                                            const ReferenceField& eval_field);

/// Versioned binary checkpoints. The dense form is the modular container
/// with a K=0 marker and no meta block.
void write_modular_checkpoint(std::ostream& os, const ModularNet& net, std::uint64_t seed,
                              const std::vector<int>& cluster_assignments);
ModularNet read_modular_checkpoint(std::istream& is, std::uint64_t* seed = nullptr,
                                   std::vector<int>* cluster_assignments = nullptr);
void write_dense_checkpoint(std::ostream& os, const DenseNet& net, std::uint64_t seed);
DenseNet read_dense_checkpoint(std::istream& is, std::uint64_t* seed = nullptr);

}  // namespace lampinn

#endif
