#pragma once

#include "ihgnn/equilibrium.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace ihgnn {

// Trainable weights of the implicit hypergraph model plus the ||W||_inf budget.
struct ModelParams {
    DenseMatrix w;      // d_h x d_h
    DenseMatrix theta1; // d x d_h
    DenseMatrix theta2; // d_h x d'
    std::vector<double> b;
    double kappa = 0.9;

    std::size_t input_dim() const noexcept { return theta1.rows(); }
    std::size_t hidden_dim() const noexcept { return w.rows(); }
    std::size_t output_dim() const noexcept { return theta2.cols(); }

    // Throws ValidationError on inconsistent shapes or kappa outside [0, 1).
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Prediction {
    DenseMatrix logits;
    DenseMatrix probabilities; // row-wise softmax of logits
};

// Row softmax with max subtraction.
Prediction make_prediction(DenseMatrix logits);

// X~ = X Theta1 + 1 b^T
DenseMatrix affine_input(const DenseMatrix& x, const ModelParams& params);

struct ForwardResult {
    Prediction prediction;
    EquilibriumSolution equilibrium;
};

// affine_input -> solve_forward -> logits = Z* Theta2 -> softmax. A
// non-converged solve is returned as-is; callers check equilibrium.converged.
ForwardResult forward(const DenseMatrix& x, const PropagationOperator& op, const ModelParams& params,
                      const Activation& act, const SolverConfig& cfg = {}, const DenseMatrix* init = nullptr);

struct LossResult {
    double loss = 0.0;
    DenseMatrix grad_logits; // zero outside the mask
};

// Mean cross-entropy over masked nodes and its gradient w.r.t. the logits.
LossResult cross_entropy_masked(const Prediction& pred, std::span<const int> labels, std::span<const std::size_t> mask);

// Rows whose l1 norm is at most kappa + kProjectionSlack count as feasible and
// are left untouched, which makes the projection bitwise idempotent.
inline constexpr double kProjectionSlack = 1e-13;

// Frobenius-nearest matrix with ||W'||_inf <= kappa: each row is projected onto
// the l1 ball of radius kappa by sort-based soft-thresholding.
DenseMatrix project_inf_ball(const DenseMatrix& w, double kappa);

// (alpha W, alpha Theta1, alpha b, Theta2 / alpha). Note the equilibrium of the
// scaled model is not alpha Z* unless M Z* W vanishes, so logits generally
// change; see rebalanced() for a transform that preserves them.
ModelParams rescaled(const ModelParams& params, double alpha);

// Diagonal similarity W' = S^-1 W S with S = diag(v), v > 0 solving
// v = 1 + |W| v / target. Theta1 and b are scaled by S, Theta2 by S^-1; the
// equilibrium becomes Z* S and the logits are unchanged for positively
// homogeneous activations. Result has ||W'||_inf < target whenever
// rho(|W|) < target, otherwise throws ValidationError. kappa is set to target.
ModelParams rebalanced(const ModelParams& params, double target = 0.999);

// Versioned text checkpoint. Doubles are written as shortest round-trip
// decimals, so save/load is bit-exact.
struct Checkpoint {
    ModelParams params;
    Activation activation = Activation::relu();

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace ihgnn
