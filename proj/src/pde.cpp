#include "lampinn/pde.hpp"

#include "lampinn/jet_prop.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace lampinn {

namespace {
constexpr double kPi = std::numbers::pi;
}

double helmholtz_exact(const TaskConfig& task, double x, double y) {
    const double A = task.values.at(0), B = task.values.at(1), C = task.values.at(2);
    if (B == 0.0 || C == 0.0) throw std::invalid_argument("helmholtz_exact: B and C must be nonzero");
    return A * std::sin(x / B) * std::sin(y / C);
}

PdeProblem PdeProblem::helmholtz(const TaskConfig& task, double domain_scale) {
    if (task.values.size() != 3) throw std::invalid_argument("helmholtz task needs 3 values (A,B,C)");
    if (task.values[1] == 0.0 || task.values[2] == 0.0)
        throw std::invalid_argument("helmholtz task: B and C must be nonzero");
    PdeProblem p;
    p.family = PdeFamily::Helmholtz2D;
    p.task = task;
    p.lo = Vec::Constant(2, -30.0 * domain_scale);
    p.hi = Vec::Constant(2, 30.0 * domain_scale);
    return p;
}

PdeProblem PdeProblem::burgers(const TaskConfig& task) {
    if (task.values.size() != 3) throw std::invalid_argument("burgers task needs 3 values (alpha,nu,A)");
    PdeProblem p;
    p.family = PdeFamily::Burgers1D;
    p.task = task;
    p.lo = Vec(2);
    p.hi = Vec(2);
    p.lo << -1.0, 0.0;  // (x, t)
    p.hi << 1.0, 1.0;
    return p;
}

double PdeProblem::residual(const EvalJet& jet, const Vec& /*x*/) const {
    if (family == PdeFamily::Helmholtz2D) {
        if (jet.d2_input.rows() != 2) throw std::invalid_argument("helmholtz residual: need 2x2 second derivatives");
        const double B = task.values[1], C = task.values[2];
        return jet.d2_input(0, 0) + jet.d2_input(1, 1) + jet.value / (B * B) + jet.value / (C * C);
    }
    if (jet.d2_input.rows() != 2) throw std::invalid_argument("burgers residual: need second derivatives");
    const double alpha = task.values[0], nu = task.values[1];
    const double u = jet.value, u_x = jet.d_input[0], u_t = jet.d_input[1], u_xx = jet.d2_input(0, 0);
    return u_t + 2.0 * alpha * u * u_x - nu * u_xx;
}

void PdeProblem::residual_partials(const EvalJet& jet, const Vec& /*x*/, double& d_value, Vec& d_d1,
                                   Mat& d_d2) const {
    const int n = dim();
    d_d1 = Vec::Zero(n);
    d_d2 = Mat::Zero(n, n);
    if (family == PdeFamily::Helmholtz2D) {
        const double B = task.values[1], C = task.values[2];
        d_value = 1.0 / (B * B) + 1.0 / (C * C);
        d_d2(0, 0) = 1.0;
        d_d2(1, 1) = 1.0;
        return;
    }
    const double alpha = task.values[0], nu = task.values[1];
    d_value = 2.0 * alpha * jet.d_input[0];
    d_d1[0] = 2.0 * alpha * jet.value;
    d_d1[1] = 1.0;
    d_d2(0, 0) = -nu;
}

double PdeProblem::exact(const Vec& x) const {
    if (family != PdeFamily::Helmholtz2D) throw std::logic_error("exact solution only for Helmholtz");
    return helmholtz_exact(task, x[0], x[1]);
}

double PdeProblem::data_target(const Vec& x) const {
    if (family == PdeFamily::Helmholtz2D) return exact(x);
    const double A = task.values[2];
    if (x[1] == 0.0) return -A * std::sin(kPi * x[0]);  // IC
    return 0.0;                                         // Dirichlet walls
}

CollocationSet sample_collocation(const PdeProblem& problem, int m_interior, int n_data,
                                  std::uint64_t seed) {
    if (m_interior < 1) throw std::invalid_argument("sample_collocation: m_interior must be >= 1");
    if (n_data < 0) throw std::invalid_argument("sample_collocation: n_data must be >= 0");
    CollocationSet set;
    set.seed = seed;
    std::mt19937_64 rng(seed);
    const Vec& lo = problem.lo;
    const Vec& hi = problem.hi;

    if (problem.family == PdeFamily::Helmholtz2D) {
        const int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m_interior))));
        if (g * g == m_interior) {
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j) {
                    Vec p(2);
                    p[0] = lo[0] + (i + 1) * (hi[0] - lo[0]) / (g + 1);
                    p[1] = lo[1] + (j + 1) * (hi[1] - lo[1]) / (g + 1);
                    set.interior.push_back(std::move(p));
                }
        } else {
            std::uniform_real_distribution<double> ux(lo[0], hi[0]), uy(lo[1], hi[1]);
            for (int i = 0; i < m_interior; ++i) {
                Vec p(2);
                p[0] = ux(rng);
                p[1] = uy(rng);
                set.interior.push_back(std::move(p));
            }
        }
        // evenly spaced boundary ring
        for (int i = 0; i < n_data; ++i) {
            const double s = (i + 0.5) / n_data * 4.0;  // perimeter parameter in [0,4)
            Vec p(2);
            const double w0 = hi[0] - lo[0], w1 = hi[1] - lo[1];
            if (s < 1.0) { p[0] = lo[0] + s * w0; p[1] = lo[1]; }
            else if (s < 2.0) { p[0] = hi[0]; p[1] = lo[1] + (s - 1.0) * w1; }
            else if (s < 3.0) { p[0] = hi[0] - (s - 2.0) * w0; p[1] = hi[1]; }
            else { p[0] = lo[0]; p[1] = hi[1] - (s - 3.0) * w1; }
            const double target = problem.data_target(p);
            set.data.emplace_back(std::move(p), target);
        }
        return set;
    }

    // Burgers: random interior, data split half IC / half BC
    std::uniform_real_distribution<double> ux(lo[0], hi[0]), ut(lo[1], hi[1]);
    for (int i = 0; i < m_interior; ++i) {
        Vec p(2);
        p[0] = ux(rng);
        p[1] = ut(rng);
        set.interior.push_back(std::move(p));
    }
    const int n_ic = (n_data + 1) / 2;
    for (int i = 0; i < n_data; ++i) {
        Vec p(2);
        if (i < n_ic) {
            p[0] = ux(rng);
            p[1] = 0.0;
        } else {
            p[0] = (i % 2 == 0) ? lo[0] : hi[0];
            p[1] = ut(rng);
        }
        const double target = problem.data_target(p);
        set.data.emplace_back(std::move(p), target);
    }
    return set;
}

LossTerms pinn_loss(const FieldModel& model, const PdeProblem& problem,
                    const CollocationSet& colloc) {
    LossTerms terms;
    if (!colloc.data.empty()) {
        double acc = 0.0;
        for (const auto& [x, target] : colloc.data) {
            const double d = model.eval(x) - target;
            acc += d * d;
        }
        terms.data = acc / static_cast<double>(colloc.data.size());
    }
    if (!colloc.interior.empty()) {
        double acc = 0.0;
        for (const Vec& x : colloc.interior) {
            const double r = problem.residual(model.eval_jet(x), x);
            acc += r * r;
        }
        terms.physics = acc / static_cast<double>(colloc.interior.size());
    }
    terms.total = terms.data + terms.physics;
    if (!std::isfinite(terms.total)) throw std::runtime_error("pinn_loss: non-finite loss");
    return terms;
}

LossTerms pinn_loss_grad(const DenseNet& net, const PdeProblem& problem,
                         const CollocationSet& colloc, NetGrads& grads, const FreezeMask* mask) {
    LossTerms terms;
    const int n = problem.dim();

    if (!colloc.data.empty()) {
        const double inv_n = 1.0 / static_cast<double>(colloc.data.size());
        double acc = 0.0;
        for (const auto& [x, target] : colloc.data) {
            Mat ch = Mat::Zero(x.size(), 1);  // value-only channel
            ch.col(0) = x;
            JetTrace trace = jet_forward(net, ch);
            const double d = trace.output()(0, 0) - target;
            acc += d * d;
            Mat out_bar = Mat::Zero(net.output_dim(), 1);
            out_bar(0, 0) = 2.0 * d * inv_n;
            jet_backward(net, trace, out_bar, grads);
        }
        terms.data = acc * inv_n;
    }

    if (!colloc.interior.empty()) {
        const double inv_m = 1.0 / static_cast<double>(colloc.interior.size());
        double acc = 0.0;
        for (const Vec& x : colloc.interior) {
            JetTrace trace = jet_forward(net, jet_seed_input(x));
            const EvalJet jet = jet_extract(trace, 0);
            const double r = problem.residual(jet, x);
            acc += r * r;
            double dv;
            Vec dd1;
            Mat dd2;
            problem.residual_partials(jet, x, dv, dd1, dd2);
            const double w = 2.0 * r * inv_m;
            Mat out_bar = Mat::Zero(net.output_dim(), jet_channels(n));
            out_bar(0, 0) = w * dv;
            for (int k = 0; k < n; ++k) out_bar(0, 1 + k) = w * dd1[k];
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) out_bar(0, 1 + n + k * n + l) = w * dd2(k, l);
            jet_backward(net, trace, out_bar, grads);
        }
        terms.physics = acc * inv_m;
    }

    terms.total = terms.data + terms.physics;
    if (!std::isfinite(terms.total)) throw std::runtime_error("pinn_loss_grad: non-finite loss");
    if (mask) grads.apply_mask(*mask);
    return terms;
}

std::size_t ReferenceField::size() const {
    std::size_t n = 1;
    for (const Vec& a : axes) n *= a.size();
    return n;
}

Vec ReferenceField::coords(std::size_t flat) const {
    Vec x(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
        const std::size_t n = axes[d].size();
        x[static_cast<Eigen::Index>(d)] = axes[d][static_cast<Eigen::Index>(flat % n)];
        flat /= n;
    }
    return x;
}

double ReferenceField::interpolate(const Vec& x) const {
    if (axes.size() != 2) throw std::logic_error("ReferenceField::interpolate: 2D only");
    const Vec& ax = axes[0];
    const Vec& ay = axes[1];
    auto bracket = [](const Vec& a, double v) {
        Eigen::Index i = 0;
        while (i + 2 < a.size() && a[i + 1] <= v) ++i;
        return i;
    };
    const Eigen::Index i = bracket(ax, x[0]);
    const Eigen::Index j = bracket(ay, x[1]);
    const double tx = (x[0] - ax[i]) / (ax[i + 1] - ax[i]);
    const double ty = (x[1] - ay[j]) / (ay[j + 1] - ay[j]);
    const std::size_t ny = ay.size();
    auto at = [&](Eigen::Index ii, Eigen::Index jj) { return values[ii * ny + jj]; };
    return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
           (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
}

ReferenceField burgers_reference_solve(const TaskConfig& task, int nx, int nt, int n_store) {
    if (nx < 64) throw std::invalid_argument("burgers_reference_solve: nx must be >= 64");
    const double alpha = task.values.at(0), nu = task.values.at(1), A = task.values.at(2);
    if (nu <= 0.0) throw std::invalid_argument("burgers_reference_solve: nu must be positive");
    const double dx = 2.0 / nx;
    const double dt = 1.0 / nt;
    const double max_u0 = std::abs(A);  // amplitude of the IC bounds |u| for viscous Burgers
    const double dt_diff = 0.4 * dx * dx / nu;
    const double dt_adv = (alpha * max_u0 > 0.0) ? 0.4 * dx / (2.0 * alpha * max_u0)
                                                 : std::numeric_limits<double>::infinity();
    const double dt_max = std::min(dt_diff, dt_adv);
    if (dt > dt_max) {
        std::ostringstream msg;
        msg << "burgers_reference_solve: dt=" << dt << " violates stability bound dt <= min(0.4*dx^2/nu="
            << dt_diff << ", 0.4*dx/(2*alpha*max|u|)=" << dt_adv << ")";
        throw std::invalid_argument(msg.str());
    }

    Vec u(nx + 1);
    for (int i = 0; i <= nx; ++i) u[i] = -A * std::sin(kPi * (-1.0 + i * dx));
    u[0] = 0.0;
    u[nx] = 0.0;

    auto rhs = [&](const Vec& v) {
        Vec f = Vec::Zero(nx + 1);
        for (int i = 1; i < nx; ++i) {
            const double u_x = (v[i + 1] - v[i - 1]) / (2.0 * dx);
            const double u_xx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx);
            f[i] = -2.0 * alpha * v[i] * u_x + nu * u_xx;
        }
        return f;
    };

    ReferenceField field;
    field.provenance = ReferenceField::Provenance::FiniteDifference;
    {
        std::ostringstream sp;
        sp << "central-rk4 nx=" << nx << " nt=" << nt;
        field.solver_params = sp.str();
    }
    field.axes.resize(2);
    field.axes[0].resize(nx + 1);
    for (int i = 0; i <= nx; ++i) field.axes[0][i] = -1.0 + i * dx;
    field.axes[1].resize(n_store + 1);
    field.values.assign(static_cast<std::size_t>(nx + 1) * (n_store + 1), 0.0);

    auto store = [&](int slot, double t, const Vec& v) {
        field.axes[1][slot] = t;
        for (int i = 0; i <= nx; ++i) field.values[static_cast<std::size_t>(i) * (n_store + 1) + slot] = v[i];
    };
    store(0, 0.0, u);

    int next_slot = 1;
    for (int step = 1; step <= nt; ++step) {
        const Vec k1 = rhs(u);
        const Vec k2 = rhs(u + 0.5 * dt * k1);
        const Vec k3 = rhs(u + 0.5 * dt * k2);
        const Vec k4 = rhs(u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        u[0] = 0.0;
        u[nx] = 0.0;
        while (next_slot <= n_store &&
               step == (static_cast<long long>(next_slot) * nt + n_store / 2) / n_store) {
            store(next_slot, step * dt, u);
            ++next_slot;
        }
    }
    while (next_slot <= n_store) store(next_slot++, 1.0, u);
    if (!u.allFinite()) throw std::runtime_error("burgers_reference_solve: solution diverged");
    return field;
}

ReferenceField helmholtz_reference(const PdeProblem& problem, int n_per_axis) {
    ReferenceField field;
    field.provenance = ReferenceField::Provenance::Analytic;
    field.solver_params = "closed-form";
    field.axes.resize(2);
    for (int d = 0; d < 2; ++d) {
        field.axes[d].resize(n_per_axis);
        for (int i = 0; i < n_per_axis; ++i)
            field.axes[d][i] = problem.lo[d] + i * (problem.hi[d] - problem.lo[d]) / (n_per_axis - 1);
    }
    field.values.resize(field.size());
    for (std::size_t f = 0; f < field.size(); ++f) {
        const Vec x = field.coords(f);
        field.values[f] = problem.exact(x);
    }
    return field;
}

double mse_on_grid(const std::function<double(const Vec&)>& prediction,
                   const ReferenceField& reference) {
    if (reference.size() == 0) throw std::invalid_argument("mse_on_grid: empty reference");
    double acc = 0.0;
    for (std::size_t f = 0; f < reference.size(); ++f) {
        const double d = prediction(reference.coords(f)) - reference.values[f];
        acc += d * d;
    }
    return acc / static_cast<double>(reference.size());
}

double mse_on_grid(const FieldModel& model, const ReferenceField& reference) {
    return mse_on_grid([&](const Vec& x) { return model.eval(x); }, reference);
}

void write_reference_field(std::ostream& os, const ReferenceField& field) {
    os << "lampinn-ref v1\n";
    os << (field.provenance == ReferenceField::Provenance::Analytic ? "analytic" : "finite-difference")
       << '\n';
    os << field.solver_params << '\n';
    os << field.axes.size() << '\n';
    os.precision(17);
    for (const Vec& a : field.axes) {
        os << a.size();
        for (Eigen::Index i = 0; i < a.size(); ++i) os << ' ' << a[i];
        os << '\n';
    }
    for (std::size_t i = 0; i < field.values.size(); ++i)
        os << field.values[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
    os << '\n';
}

ReferenceField read_reference_field(std::istream& is) {
    std::string header, version;
    is >> header >> version;
    if (header != "lampinn-ref" || version != "v1")
        throw std::runtime_error("reference field: unsupported format/version");
    ReferenceField field;
    std::string prov;
    is >> prov;
    field.provenance = (prov == "analytic") ? ReferenceField::Provenance::Analytic
                                            : ReferenceField::Provenance::FiniteDifference;
    is.ignore(1);
    std::getline(is, field.solver_params);
    std::size_t ndim;
    is >> ndim;
    field.axes.resize(ndim);
    for (Vec& a : field.axes) {
        Eigen::Index n;
        is >> n;
        a.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) is >> a[i];
    }
    field.values.resize(field.size());
    for (double& v : field.values)
        if (!(is >> v)) throw std::runtime_error("reference field: truncated file");
    return field;
}

}  // namespace lampinn
