#include "ihgnn/equilibrium.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"

#include <cmath>
#include <ostream>

namespace ihgnn {

Activation Activation::leaky_relu(double slope) {
    if (!(slope > 0.0 && slope <= 1.0))
        throw ValidationError("leaky_relu slope must lie in (0, 1], got " + format_double(slope));
    return Activation(Kind::leaky_relu, slope);
}

Activation Activation::parse(std::string_view text) {
    if (text == "relu") return relu();
    if (text == "tanh") return tanh();
    if (text == "identity") return identity();
    if (text == "leaky_relu") return leaky_relu(0.2);
    constexpr std::string_view leaky = "leaky_relu:";
    if (text.starts_with(leaky)) return leaky_relu(parse_double(text.substr(leaky.size())));
    throw ValidationError("unknown activation '" + std::string(text) + "'");
}

std::string Activation::name() const {
    switch (kind_) {
    case Kind::relu: return "relu";
    case Kind::leaky_relu: return "leaky_relu:" + format_double(slope_);
    case Kind::tanh: return "tanh";
    case Kind::identity: return "identity";
    }
    return "unknown";
}

double Activation::value(double x) const noexcept {
    switch (kind_) {
    case Kind::relu: return x > 0.0 ? x : 0.0;
    case Kind::leaky_relu: return x > 0.0 ? x : slope_ * x;
    case Kind::tanh: return std::tanh(x);
    case Kind::identity: return x;
    }
    return x;
}

double Activation::derivative(double x) const noexcept {
    switch (kind_) {
    case Kind::relu: return x > 0.0 ? 1.0 : 0.0;
    case Kind::leaky_relu: return x > 0.0 ? 1.0 : slope_;
    case Kind::tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
    }
    case Kind::identity: return 1.0;
    }
    return 1.0;
}

void Activation::apply_inplace(DenseMatrix& m) const noexcept {
    if (kind_ == Kind::identity) return;
    for (double& v : m.values()) v = value(v);
}

DenseMatrix Activation::derivative_at(const DenseMatrix& pre) const {
    DenseMatrix d(pre.rows(), pre.cols());
    auto out = d.values();
    auto in = pre.values();
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = derivative(in[k]);
    return d;
}

namespace {

DenseMatrix pre_activation(const PropagationOperator& op, const DenseMatrix& z, const DenseMatrix& w,
                           const DenseMatrix& x_tilde) {
    DenseMatrix pre = matmul(spmm(op.m, z), w);
    pre += x_tilde;
    return pre;
}

} // namespace

EquilibriumSolution solve_forward(const PropagationOperator& op, const DenseMatrix& w, const DenseMatrix& x_tilde,
                                  const Activation& act, const SolverConfig& cfg, const DenseMatrix* init) {
    const std::size_t n = op.size();
    if (w.rows() != w.cols()) throw ValidationError("solve_forward: W must be square");
    if (x_tilde.rows() != n || x_tilde.cols() != w.rows())
        throw ValidationError("solve_forward: X~ is " + std::to_string(x_tilde.rows()) + "x" +
                              std::to_string(x_tilde.cols()) + ", expected " + std::to_string(n) + "x" +
                              std::to_string(w.rows()));
    if (init && !init->same_shape(x_tilde)) throw ValidationError("solve_forward: init has the wrong shape");
    if (!(cfg.tol > 0.0)) throw ValidationError("solve_forward: tol must be positive");

    EquilibriumSolution sol;
    if (cfg.check != ContractionCheck::skip) {
        sol.lambda_abs_w = power_iteration_abs(w, cfg.power).value;
        if (sol.lambda_abs_w >= 1.0) {
            const std::string msg = "contraction precondition violated: lambda_max(|W|) = " +
                                    format_double(sol.lambda_abs_w) + " >= 1";
            if (cfg.check == ContractionCheck::strict) throw SolverError(msg);
            log::warn(msg);
        }
    }

    DenseMatrix z = init ? *init : DenseMatrix(n, w.rows());
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        DenseMatrix next = pre_activation(op, z, w, x_tilde);
        act.apply_inplace(next);
        if (!next.all_finite())
            throw SolverError("solve_forward: non-finite state at iteration " + std::to_string(t));
        const double r = frobenius_distance(next, z);
        sol.residuals.push_back(r);
        sol.iterations = t;
        z = std::move(next);
        if (r <= cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.pre_activation = pre_activation(op, z, w, x_tilde);
    sol.z_star = std::move(z);
    return sol;
}

double convergence_rate_fit(std::span<const double> residuals, double floor) {
    std::vector<double> ts;
    std::vector<double> ys;
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        if (residuals[k] > floor && std::isfinite(residuals[k])) {
            ts.push_back(static_cast<double>(k + 1));
            ys.push_back(std::log(residuals[k]));
        }
    }
    if (ts.size() < 4)
        throw ValidationError("convergence_rate_fit: need at least 4 residuals above " + format_double(floor) +
                              ", got " + std::to_string(ts.size()));
    const double m = static_cast<double>(ts.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        sxy += (ts[k] - mt) * (ys[k] - my);
        sxx += (ts[k] - mt) * (ts[k] - mt);
    }
    return std::exp(sxy / sxx);
}

DenseMatrix unroll_explicit(const PropagationOperator& op, const DenseMatrix& w, const DenseMatrix& x,
                            const Activation& act, std::size_t layers) {
    if (layers == 0) throw ValidationError("unroll_explicit: layers must be >= 1");
    DenseMatrix h = x;
    for (std::size_t l = 0; l < layers; ++l) {
        h = matmul(spmm(op.m, h), w);
        act.apply_inplace(h);
    }
    return h;
}

void write_residual_csv(std::ostream& out, std::span<const double> residuals) {
    out << "iteration,residual\n";
    for (std::size_t k = 0; k < residuals.size(); ++k) out << (k + 1) << ',' << format_double(residuals[k]) << '\n';
}

} // namespace ihgnn
