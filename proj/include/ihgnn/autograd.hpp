#pragma once

#include "ihgnn/equilibrium.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"

#include <vector>

namespace ihgnn {

struct AdjointSolution {
    DenseMatrix u;                 // dL/d(pre-activation), n x d_h
    std::vector<double> residuals; // ||U(t) - U(t-1)||_F
    std::size_t iterations = 0;
};

struct GradientBundle {
    DenseMatrix grad_w;      // d_h x d_h
    DenseMatrix grad_theta1; // d x d_h
    DenseMatrix grad_theta2; // d_h x d'
    std::vector<double> grad_b;
    std::vector<double> adjoint_residuals;

    bool all_finite() const;
};

// Solves U = phi'(A*) .* (M^T U W^T + G) by fixed-point iteration, where A* is
// the cached pre-activation of `sol` and G = dL/dZ*. M is symmetric, so M^T = M.
// Throws SolverError (with the tail of the residual trace) on non-convergence.
AdjointSolution solve_adjoint(const PropagationOperator& op, const DenseMatrix& w, const EquilibriumSolution& sol,
                              const Activation& act, const DenseMatrix& upstream, const SolverConfig& cfg = {},
                              const DenseMatrix* init = nullptr);

// dL/dZ* through the linear readout: dL/dlogits * Theta2^T.
DenseMatrix readout_upstream(const DenseMatrix& loss_grad_output, const DenseMatrix& theta2);

// grad_w = (M Z*)^T U, grad_theta1 = X^T U, grad_b = U^T 1, grad_theta2 = Z*^T dL/dlogits.
GradientBundle parameter_gradients(const DenseMatrix& x, const PropagationOperator& op, const EquilibriumSolution& sol,
                                   const AdjointSolution& adjoint, const DenseMatrix& loss_grad_output,
                                   const DenseMatrix& theta2);

} // namespace ihgnn
