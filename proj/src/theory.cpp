#include "ihgnn/theory.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace ihgnn {

void PolynomialFilter::validate() const {
    if (coefficients.empty()) throw ValidationError("polynomial filter needs at least theta_0");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw ValidationError("polynomial filter coefficient is not finite");
}

ModelParams expressivity_construct(const PolynomialFilter& filter, std::size_t d) {
    filter.validate();
    if (d == 0) throw ValidationError("expressivity_construct: d must be positive");
    const std::size_t blocks = filter.order() + 1;
    const std::size_t dh = blocks * d;
    ModelParams p;
    // kappa is bookkeeping here: the construction sits on ||W||_inf = 1.
    p.kappa = 0.0;
    p.w = DenseMatrix(dh, dh);
    for (std::size_t k = 0; k + 1 < blocks; ++k)
        for (std::size_t i = 0; i < d; ++i) p.w(k * d + i, (k + 1) * d + i) = 1.0;
    p.theta1 = DenseMatrix(d, dh);
    for (std::size_t i = 0; i < d; ++i) p.theta1(i, i) = 1.0;
    p.theta2 = DenseMatrix(dh, d);
    for (std::size_t k = 0; k < blocks; ++k)
        for (std::size_t i = 0; i < d; ++i) p.theta2(k * d + i, i) = filter.coefficients[k];
    p.b.assign(dh, 0.0);
    return p;
}

SolverConfig expressivity_solver_config(const PolynomialFilter& filter, double tol) {
    SolverConfig cfg;
    cfg.tol = tol;
    cfg.max_iters = filter.order() + 2;
    cfg.check = ContractionCheck::skip;
    return cfg;
}

DenseMatrix apply_polynomial_filter(const PropagationOperator& op, const PolynomialFilter& filter, const DenseMatrix& x) {
    filter.validate();
    DenseMatrix power = x;
    DenseMatrix out = filter.coefficients[0] * x;
    for (std::size_t k = 1; k < filter.coefficients.size(); ++k) {
        power = spmm(op.m, power);
        out += filter.coefficients[k] * power;
    }
    return out;
}

void BoundInputs::validate() const {
    if (!(s >= 1.0 && u >= 1.0)) throw ValidationError("bound: s and u must be at least 1");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("bound: kappa must lie in [0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("bound: delta must lie in (0, 1)");
    for (double v : {d, rho1, rho2, c_x, c_b, c_ell})
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("bound: constants must be finite and nonnegative");
    if (!std::isfinite(empirical_loss)) throw ValidationError("bound: empirical loss must be finite");
}

double c0_constant() { return std::sqrt(32.0 * std::log(4.0 * std::numbers::e) / 3.0); }

BoundTerms generalization_bound(const BoundInputs& in) {
    in.validate();
    BoundTerms t;
    t.empirical_loss = in.empirical_loss;
    t.p = 1.0 / in.s + 1.0 / in.u;
    t.q = (in.s + in.u) / ((in.s + in.u - 0.5) * (1.0 - 1.0 / (2.0 * std::max(in.s, in.u))));
    t.complexity = std::numbers::sqrt2 * in.rho2 * in.c_ell * (in.rho1 * in.c_x + std::sqrt(in.d) * in.c_b) /
                   ((1.0 - in.kappa) * std::sqrt(in.s + in.u));
    t.sampling = c0_constant() * t.p * std::sqrt(std::min(in.s, in.u));
    t.confidence = std::sqrt(t.p * t.q / 2.0 * std::log(1.0 / in.delta));
    return t;
}

double row_dispersion(const DenseMatrix& z) {
    const std::size_t n = z.rows();
    if (n < 2 || z.cols() == 0) return 0.0;
    long double total = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = z.row(i);
        for (std::size_t k = i + 1; k < n; ++k) {
            const auto b = z.row(k);
            double ss = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) ss += (a[j] - b[j]) * (a[j] - b[j]);
            total += std::sqrt(ss);
        }
    }
    const long double pairs = static_cast<long double>(n) * static_cast<long double>(n - 1) / 2.0L;
    return static_cast<double>(total / pairs / static_cast<long double>(z.cols()));
}

std::vector<OversmoothingRow> oversmoothing_profile(const PropagationOperator& op, const ModelParams& params,
                                                    const Activation& act, const DenseMatrix& x,
                                                    std::span<const std::size_t> depths, const SolverConfig& solver) {
    if (depths.empty()) throw ValidationError("oversmoothing_profile: no depths given");
    const DenseMatrix xt = affine_input(x, params);
    const auto eq = solve_forward(op, params.w, xt, act, solver);
    if (!eq.converged) throw SolverError("oversmoothing_profile: implicit solve did not converge");
    const double implicit = row_dispersion(eq.z_star);

    std::vector<OversmoothingRow> rows;
    for (std::size_t depth : depths) {
        OversmoothingRow r;
        r.depth = depth;
        r.explicit_dispersion = depth == 0 ? row_dispersion(xt) : row_dispersion(unroll_explicit(op, params.w, xt, act, depth));
        r.implicit_dispersion = implicit;
        rows.push_back(r);
    }
    return rows;
}

void write_oversmoothing_csv(std::ostream& out, std::span<const OversmoothingRow> rows) {
    out << "depth,explicit_dispersion,implicit_dispersion\n";
    for (const auto& r : rows)
        out << r.depth << ',' << format_double(r.explicit_dispersion) << ',' << format_double(r.implicit_dispersion)
            << '\n';
}

} // namespace ihgnn
