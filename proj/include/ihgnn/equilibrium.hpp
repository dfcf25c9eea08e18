#pragma once

#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ihgnn {

// Entrywise nonlinearity. Every kind is 1-Lipschitz.
class Activation {
public:
    enum class Kind { relu, leaky_relu, tanh, identity };

    static Activation relu() { return Activation(Kind::relu, 0.0); }
    static Activation leaky_relu(double slope); // slope in (0, 1]
    static Activation tanh() { return Activation(Kind::tanh, 0.0); }
    static Activation identity() { return Activation(Kind::identity, 1.0); }
    // "relu", "tanh", "identity", "leaky_relu" or "leaky_relu:<slope>".
    static Activation parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    double slope() const noexcept { return slope_; }
    std::string name() const;

    double value(double x) const noexcept;
    // relu'(0) := 0, leaky'(0) := slope.
    double derivative(double x) const noexcept;

    bool positively_homogeneous() const noexcept { return kind_ != Kind::tanh; }
    bool strictly_increasing() const noexcept { return kind_ != Kind::relu; }

    void apply_inplace(DenseMatrix& m) const noexcept;
    DenseMatrix derivative_at(const DenseMatrix& pre) const;

    friend bool operator==(const Activation&, const Activation&) = default;

private:
    Activation(Kind kind, double slope) : kind_(kind), slope_(slope) {}
    Kind kind_ = Kind::relu;
    double slope_ = 0.0;
};

enum class ContractionCheck {
    strict, // lambda_max(|W|) >= 1 is a SolverError
    warn,   // logged, solve proceeds
    skip,   // not evaluated (caller vouches for convergence)
};

struct SolverConfig {
    double tol = 1e-6;
    std::size_t max_iters = 300;
    ContractionCheck check = ContractionCheck::warn;
    PowerIterationOptions power{50, 1e-8};
};

struct EquilibriumSolution {
    DenseMatrix z_star;
    DenseMatrix pre_activation;   // M Z* W + X~, evaluated at the returned z_star
    std::vector<double> residuals; // ||Z(t) - Z(t-1)||_F, one per map application
    std::size_t iterations = 0;
    bool converged = false;
    double lambda_abs_w = -1.0;    // measured lambda_max(|W|); -1 when the check was skipped
};

// Picard iteration Z <- phi(M Z W + X~) from `init` (zero when null) until the
// absolute Frobenius step is <= tol. Returns a non-converged solution rather
// than throwing when max_iters is exhausted.
EquilibriumSolution solve_forward(const PropagationOperator& op, const DenseMatrix& w, const DenseMatrix& x_tilde,
                                  const Activation& act, const SolverConfig& cfg = {},
                                  const DenseMatrix* init = nullptr);

// Geometric rate exp(slope) of the least-squares line through log residuals,
// using only residuals above `floor`. Needs at least four of them.
double convergence_rate_fit(std::span<const double> residuals, double floor = 1e-14);

// Classical stacked propagation X(t+1) = phi(M X(t) W), `layers` times.
DenseMatrix unroll_explicit(const PropagationOperator& op, const DenseMatrix& w, const DenseMatrix& x,
                            const Activation& act, std::size_t layers);

// "iteration,residual" with 1-based iteration numbers.
void write_residual_csv(std::ostream& out, std::span<const double> residuals);

} // namespace ihgnn
