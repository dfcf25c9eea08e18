#pragma once

#include "ihgnn/equilibrium.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/model.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace ihgnn {

// X -> (sum_k theta_k M^k) X
struct PolynomialFilter {
    std::vector<double> coefficients; // theta_0 .. theta_K

    std::size_t order() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    void validate() const;
};

// d_h = (K+1) d. W has identity blocks on the block superdiagonal,
// Theta1 = [I 0 ... 0], b = 0, Theta2 stacks theta_k I. With identity
// activation the fixed point holds M^k X in block k, so the logits equal the
// filter output.
ModelParams expressivity_construct(const PolynomialFilter& filter, std::size_t d);

// The shift W is nilpotent (lambda_max(|W|) = 0) but ||W||_inf = 1, so the
// solver's contraction check is bypassed for this construction.
SolverConfig expressivity_solver_config(const PolynomialFilter& filter, double tol = 1e-12);

DenseMatrix apply_polynomial_filter(const PropagationOperator& op, const PolynomialFilter& filter, const DenseMatrix& x);

struct BoundInputs {
    double s = 1.0; // labeled
    double u = 1.0; // unlabeled
    double d = 1.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
    double c_x = 1.0;
    double c_b = 1.0;
    double c_ell = 1.0;
    double kappa = 0.5;
    double delta = 0.1;
    double empirical_loss = 0.0;

    void validate() const;
};

struct BoundTerms {
    double empirical_loss = 0.0;
    double complexity = 0.0; // sqrt(2) rho2 C_l (rho1 C_x + sqrt(d) C_b) / ((1 - kappa) sqrt(s + u))
    double sampling = 0.0;   // c0 P sqrt(min(s, u))
    double confidence = 0.0; // sqrt(P Q / 2 log(1 / delta))
    double p = 0.0;
    double q = 0.0;

    double total() const noexcept { return empirical_loss + complexity + sampling + confidence; }
};

// sqrt(32 log(4e) / 3)
double c0_constant();
BoundTerms generalization_bound(const BoundInputs& in);

// Mean Euclidean distance over all unordered row pairs, divided by the column
// count. Zero for fewer than two rows.
double row_dispersion(const DenseMatrix& z);

struct OversmoothingRow {
    std::size_t depth = 0;
    double explicit_dispersion = 0.0;
    double implicit_dispersion = 0.0;
};

// Explicit path: X~ pushed through `depth` shared-W layers. Implicit path: the
// fixed point for the same X~ (one solve, repeated on every row).
std::vector<OversmoothingRow> oversmoothing_profile(const PropagationOperator& op, const ModelParams& params,
                                                    const Activation& act, const DenseMatrix& x,
                                                    std::span<const std::size_t> depths, const SolverConfig& solver = {});

// depth,explicit_dispersion,implicit_dispersion
void write_oversmoothing_csv(std::ostream& out, std::span<const OversmoothingRow> rows);

} // namespace ihgnn
