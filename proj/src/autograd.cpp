#include "ihgnn/autograd.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/numfmt.hpp"

#include <cmath>

namespace ihgnn {

bool GradientBundle::all_finite() const {
    for (double v : grad_b)
        if (!std::isfinite(v)) return false;
    return grad_w.all_finite() && grad_theta1.all_finite() && grad_theta2.all_finite();
}

AdjointSolution solve_adjoint(const PropagationOperator& op, const DenseMatrix& w, const EquilibriumSolution& sol,
                              const Activation& act, const DenseMatrix& upstream, const SolverConfig& cfg,
                              const DenseMatrix* init) {
    if (!sol.converged) throw ValidationError("solve_adjoint: forward solution did not converge");
    if (!upstream.same_shape(sol.z_star)) throw ValidationError("solve_adjoint: upstream gradient has the wrong shape");
    if (init && !init->same_shape(upstream)) throw ValidationError("solve_adjoint: init has the wrong shape");

    const DenseMatrix slope = act.derivative_at(sol.pre_activation);
    AdjointSolution adj;
    adj.u = init ? *init : DenseMatrix(upstream.rows(), upstream.cols());
    for (std::size_t t = 1; t <= cfg.max_iters; ++t) {
        DenseMatrix next = matmul_nt(spmm(op.m, adj.u), w);
        next += upstream;
        next = hadamard(slope, next);
        if (!next.all_finite())
            throw SolverError("solve_adjoint: non-finite adjoint at iteration " + std::to_string(t));
        const double r = frobenius_distance(next, adj.u);
        adj.residuals.push_back(r);
        adj.iterations = t;
        adj.u = std::move(next);
        if (r <= cfg.tol) return adj;
    }
    std::string tail;
    const std::size_t from = adj.residuals.size() > 3 ? adj.residuals.size() - 3 : 0;
    for (std::size_t k = from; k < adj.residuals.size(); ++k) tail += " " + format_double(adj.residuals[k]);
    throw SolverError("solve_adjoint: no convergence in " + std::to_string(cfg.max_iters) +
                      " iterations; last residuals:" + tail);
}

DenseMatrix readout_upstream(const DenseMatrix& loss_grad_output, const DenseMatrix& theta2) {
    return matmul_nt(loss_grad_output, theta2);
}

GradientBundle parameter_gradients(const DenseMatrix& x, const PropagationOperator& op, const EquilibriumSolution& sol,
                                   const AdjointSolution& adjoint, const DenseMatrix& loss_grad_output,
                                   const DenseMatrix& theta2) {
    const DenseMatrix& u = adjoint.u;
    if (!u.same_shape(sol.z_star)) throw ValidationError("parameter_gradients: adjoint does not match solution");
    if (x.rows() != u.rows()) throw ValidationError("parameter_gradients: X has the wrong number of rows");
    if (loss_grad_output.rows() != u.rows() || loss_grad_output.cols() != theta2.cols() ||
        theta2.rows() != u.cols())
        throw ValidationError("parameter_gradients: readout shapes are inconsistent");

    GradientBundle g;
    g.grad_w = matmul_tn(spmm(op.m, sol.z_star), u);
    g.grad_theta1 = matmul_tn(x, u);
    g.grad_theta2 = matmul_tn(sol.z_star, loss_grad_output);
    g.grad_b.assign(u.cols(), 0.0);
    for (std::size_t i = 0; i < u.rows(); ++i) {
        const auto row = u.row(i);
        for (std::size_t j = 0; j < u.cols(); ++j) g.grad_b[j] += row[j];
    }
    g.adjoint_residuals = adjoint.residuals;
    return g;
}

} // namespace ihgnn
