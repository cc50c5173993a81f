#ifndef LAMPINN_PDE_HPP
#define LAMPINN_PDE_HPP

#include "lampinn/dense_net.hpp"
#include "lampinn/doe.hpp"

#include <functional>
#include <iosfwd>
#include <utility>

namespace lampinn {

/// Anything that can be evaluated as a scalar field with exact input
/// derivatives. DenseNet and ModularNet both provide this view.
class FieldModel {
   public:
    virtual ~FieldModel() = default;
    virtual double eval(const Vec& x) const = 0;
    virtual EvalJet eval_jet(const Vec& x) const = 0;
};

class DenseFieldModel final : public FieldModel {
   public:
    explicit DenseFieldModel(const DenseNet& net) : net_(net) {}
    double eval(const Vec& x) const override { return net_.forward(x)[0]; }
    EvalJet eval_jet(const Vec& x) const override { return forward_jet(net_, x, 0); }

   private:
    const DenseNet& net_;
};

/// One PDE instance: family, domain box, and the task parameters.
struct PdeProblem {
    PdeFamily family = PdeFamily::Helmholtz2D;
    TaskConfig task;
    Vec lo;  // per-coordinate lower bounds
    Vec hi;

    int dim() const { return static_cast<int>(lo.size()); }

    /// Helmholtz on [-30,30]^2 scaled by domain_scale; coordinates (x, y).
    static PdeProblem helmholtz(const TaskConfig& task, double domain_scale = 1.0);
    /// Burgers on x in [-1,1], t in [0,1]; coordinates (x, t).
    static PdeProblem burgers(const TaskConfig& task);

    double residual(const EvalJet& jet, const Vec& x) const;
    /// Partial derivatives of the residual w.r.t. the jet components.
    void residual_partials(const EvalJet& jet, const Vec& x, double& d_value, Vec& d_d1,
                           Mat& d_d2) const;

    /// Analytic solution (Helmholtz only).
    double exact(const Vec& x) const;
    bool has_exact() const { return family == PdeFamily::Helmholtz2D; }

    /// Target for a data (boundary/IC) point.
    double data_target(const Vec& x) const;
};

double helmholtz_exact(const TaskConfig& task, double x, double y);

struct CollocationSet {
    std::vector<Vec> interior;
    std::vector<std::pair<Vec, double>> data;  // (coordinates, target)
    std::uint64_t seed = 0;
};

/// Helmholtz: tensor grid interior (when m_interior is a perfect square)
/// and an evenly spaced boundary ring with analytic targets. Burgers:
/// uniform random interior, data points split between IC and BCs.
CollocationSet sample_collocation(const PdeProblem& problem, int m_interior, int n_data,
                                  std::uint64_t seed);

struct LossTerms {
    double total = 0.0;
    double data = 0.0;
    double physics = 0.0;
};

LossTerms pinn_loss(const FieldModel& model, const PdeProblem& problem,
                    const CollocationSet& colloc);

/// Composite PINN loss and its exact parameter gradient for a plain
/// DenseNet, with frozen layers zeroed.
LossTerms pinn_loss_grad(const DenseNet& net, const PdeProblem& problem,
                         const CollocationSet& colloc, NetGrads& grads,
                         const FreezeMask* mask = nullptr);

struct ReferenceField {
    enum class Provenance { Analytic, FiniteDifference };
    Provenance provenance = Provenance::Analytic;
    std::string solver_params;
    std::vector<Vec> axes;       // strictly monotone grid per coordinate
    std::vector<double> values;  // row-major over axes

    std::size_t size() const;
    Vec coords(std::size_t flat_index) const;
    /// Bilinear (2D) interpolation at an off-node point.
    double interpolate(const Vec& x) const;
};

/// Method-of-lines solve of the Burgers task: central differences in x,
/// classical RK4 in t, Dirichlet u(+-1,t)=0, IC u(x,0) = -A sin(pi x).
/// nx intervals in space, nt RK4 steps, n_store+1 stored time slices.
ReferenceField burgers_reference_solve(const TaskConfig& task, int nx, int nt, int n_store = 100);

/// Analytic Helmholtz reference sampled on an (n x n) grid over the domain.
ReferenceField helmholtz_reference(const PdeProblem& problem, int n_per_axis);

double mse_on_grid(const std::function<double(const Vec&)>& prediction,
                   const ReferenceField& reference);
double mse_on_grid(const FieldModel& model, const ReferenceField& reference);

void write_reference_field(std::ostream& os, const ReferenceField& field);
ReferenceField read_reference_field(std::istream& is);

}  // namespace lampinn

#endif
