#include "ihgnn/verify.hpp"

#include "ihgnn/autograd.hpp"
#include "ihgnn/error.hpp"
#include "ihgnn/model.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/rng.hpp"
#include "ihgnn/synthetic.hpp"
#include "ihgnn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace ihgnn::verify {

namespace {

using synthetic::random_matrix;
using synthetic::random_weight;

std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

PropagationOperator random_operator(Rng& rng, std::size_t n) {
    synthetic::HypergraphShape shape;
    shape.nodes = n;
    shape.extra_edges = 3 * n;
    shape.max_edge_size = 6;
    return build_operator(synthetic::random_hypergraph(shape, rng));
}

ModelParams random_params(Rng& rng, std::size_t d, std::size_t dh, std::size_t dout, double norm_inf) {
    ModelParams p;
    p.kappa = std::min(0.99, norm_inf + 1e-9);
    p.w = random_weight(dh, norm_inf, rng);
    p.theta1 = random_matrix(d, dh, rng);
    p.theta2 = random_matrix(dh, dout, rng);
    p.b.resize(dh);
    for (double& v : p.b) v = uniform(rng, -0.5, 0.5);
    return p;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
    return worst;
}

double max_pairwise_row_distance(const DenseMatrix& z) {
    double worst = 0.0;
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t k = i + 1; k < z.rows(); ++k) {
            double ss = 0.0;
            for (std::size_t j = 0; j < z.cols(); ++j) ss += (z(i, j) - z(k, j)) * (z(i, j) - z(k, j));
            worst = std::max(worst, std::sqrt(ss));
        }
    return worst;
}

CheckResult check_rowsum(const Options& opts) {
    CheckResult r{"rowsum", false, 0.0, 1e-10, {}, {"validate_admissible", "build_operator", "row_stochastic_check", "power_iteration_abs"}};
    Rng rng = substream(opts.seed, "verify/rowsum");
    double worst_row = 0.0, worst_eig = 0.0, worst_sym = 0.0;
    auto inspect = [&](const PropagationOperator& op) {
        worst_row = std::max(worst_row, row_stochastic_check(op));
        const auto pi = power_iteration_abs(op.m, {1000, 1e-14, 0x5eed});
        worst_eig = std::max(worst_eig, std::abs(pi.value - 1.0));
        const DenseMatrix m = op.m.to_dense();
        worst_sym = std::max(worst_sym, frobenius_distance(m, m.transposed()));
    };
    for (int k = 0; k < 20; ++k) inspect(random_operator(rng, uniform_size(rng, 2, 200)));
    if (opts.hypergraph) {
        if (!validate_admissible(*opts.hypergraph).admissible())
            throw ValidationError("rowsum: supplied hypergraph is not admissible");
        inspect(build_operator(*opts.hypergraph));
    }
    r.measured = worst_row;
    r.passed = worst_row <= 1e-10 && worst_eig <= 1e-6 && worst_sym <= 1e-12;
    r.detail = "max |rowsum(P)-1| " + format_double(worst_row) + ", max |lambda_max(M)-1| " + format_double(worst_eig) +
               ", max ||M-M^T||_F " + format_double(worst_sym);
    return r;
}

CheckResult check_rate(const Options& opts) {
    CheckResult r{"rate", true, 0.0, 0.02, {}, {"solve_forward", "convergence_rate_fit", "power_iteration_abs"}};
    Rng rng = substream(opts.seed, "verify/rate");
    double worst_excess = -1.0, worst_envelope = 0.0;
    for (double kappa : {0.5, 0.8, 0.95}) {
        for (int k = 0; k < 3; ++k) {
            const auto op = random_operator(rng, 40);
            const DenseMatrix w = random_weight(8, kappa, rng);
            const DenseMatrix xt = random_matrix(40, 8, rng);
            SolverConfig cfg;
            cfg.tol = 1e-12;
            cfg.max_iters = 5000;
            cfg.check = ContractionCheck::strict;
            const auto sol = solve_forward(op, w, xt, Activation::relu(), cfg);
            if (!sol.converged) {
                r.passed = false;
                r.detail = "no convergence at kappa " + format_double(kappa);
                return r;
            }
            const double rate = convergence_rate_fit(sol.residuals);
            worst_excess = std::max(worst_excess, rate - kappa);
            const double r1 = sol.residuals.front();
            for (std::size_t t = 0; t < sol.residuals.size(); ++t) {
                const double env = std::pow(kappa, static_cast<double>(t)) * r1;
                if (env > 0.0) worst_envelope = std::max(worst_envelope, sol.residuals[t] / env);
            }
        }
    }
    r.measured = worst_excess;
    r.passed = worst_excess <= 0.02 && worst_envelope <= 1.05;
    r.detail = "max (fitted rate - kappa) " + format_double(worst_excess) + ", max residual/envelope " +
               format_double(worst_envelope);
    return r;
}

CheckResult check_uniqueness(const Options& opts) {
    SolverConfig cfg;
    CheckResult r{"uniqueness", false, 0.0, 10.0 * cfg.tol, {}, {"solve_forward", "frobenius_distance"}};
    Rng rng = substream(opts.seed, "verify/uniqueness");
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const auto op = random_operator(rng, 30);
        const DenseMatrix w = random_weight(6, 0.7, rng);
        const DenseMatrix xt = random_matrix(30, 6, rng);
        const DenseMatrix a = random_matrix(30, 6, rng, -5.0, 5.0);
        DenseMatrix dir = random_matrix(30, 6, rng);
        dir *= 10.0 / frobenius_norm(dir);
        const DenseMatrix b = a + dir;
        const auto sa = solve_forward(op, w, xt, Activation::relu(), cfg, &a);
        const auto sb = solve_forward(op, w, xt, Activation::relu(), cfg, &b);
        if (!sa.converged || !sb.converged) {
            r.detail = "solve did not converge";
            return r;
        }
        worst = std::max(worst, frobenius_distance(sa.z_star, sb.z_star));
    }
    r.measured = worst;
    r.passed = worst <= r.threshold;
    r.detail = "max ||Z*_a - Z*_b||_F " + format_double(worst) + " from inits 10 apart";
    return r;
}

CheckResult check_nonconstant(const Options& opts) {
    CheckResult r{"nonconstant", false, 0.0, 1e-8, {}, {"affine_input", "forward", "solve_forward"}};
    Rng rng = substream(opts.seed, "verify/nonconstant");
    double weakest = INFINITY;
    int tested = 0;
    while (tested < 20) {
        const auto op = random_operator(rng, 25);
        const auto p = random_params(rng, 4, 6, 3, 0.9);
        const DenseMatrix x = random_matrix(25, 4, rng);
        if (max_pairwise_row_distance(affine_input(x, p)) < 0.1) continue;
        SolverConfig cfg;
        cfg.tol = 1e-10;
        cfg.max_iters = 2000;
        const auto fwd = forward(x, op, p, Activation::tanh(), cfg);
        if (!fwd.equilibrium.converged) {
            r.detail = "solve did not converge";
            return r;
        }
        weakest = std::min(weakest, max_pairwise_row_distance(fwd.equilibrium.z_star));
        ++tested;
    }
    r.measured = weakest;
    r.passed = weakest > 1e-8;
    r.detail = "smallest max pairwise row distance of Z* " + format_double(weakest) + " (tanh, 20 instances)";
    return r;
}

CheckResult check_expressivity(const Options& opts) {
    const std::size_t order = opts.expressivity_order;
    CheckResult r{"expressivity", false, 0.0, 1e-8, {}, {"expressivity_construct", "forward", "solve_forward", "apply_polynomial_filter"}};
    Rng rng = substream(opts.seed, "verify/expressivity");
    double worst = 0.0;
    std::size_t most_iters = 0;
    bool exact = true;
    for (int k = 0; k < 10; ++k) {
        const auto op = random_operator(rng, 30);
        PolynomialFilter filter;
        for (std::size_t j = 0; j <= order; ++j) filter.coefficients.push_back(uniform(rng, -1.0, 1.0));
        const std::size_t d = 3;
        const DenseMatrix x = random_matrix(30, d, rng);
        const auto params = expressivity_construct(filter, d);
        const auto fwd = forward(x, op, params, Activation::identity(), expressivity_solver_config(filter));
        if (!fwd.equilibrium.converged) {
            r.detail = "construction did not reach its fixed point";
            return r;
        }
        // dense oracle: sum_k theta_k M^k X with plain products
        const DenseMatrix m = op.m.to_dense();
        DenseMatrix power = x;
        DenseMatrix expect = filter.coefficients[0] * x;
        for (std::size_t j = 1; j <= order; ++j) {
            power = reference::matmul(m, power);
            expect += filter.coefficients[j] * power;
        }
        worst = std::max(worst, max_abs_diff(fwd.prediction.logits, expect));
        worst = std::max(worst, max_abs_diff(apply_polynomial_filter(op, filter, x), expect));
        most_iters = std::max(most_iters, fwd.equilibrium.iterations);
        exact = exact && fwd.equilibrium.residuals.back() <= 1e-12;
    }
    // the final iteration only confirms a zero step, so K+1 iterations produce Z*
    const std::size_t productive = most_iters - 1;
    r.measured = worst;
    r.passed = worst <= 1e-8 && productive <= order + 1 && exact;
    r.detail = "K=" + std::to_string(order) + ", max |logits - dense filter| " + format_double(worst) +
               ", productive iterations " + std::to_string(productive);
    return r;
}

CheckResult check_scaling(const Options& opts) {
    CheckResult r{"scaling", false, 0.0, 1e-9, {}, {"rebalanced", "rescaled", "forward", "solve_forward"}};
    Rng rng = substream(opts.seed, "verify/scaling");
    double worst = 0.0, worst_alpha = 0.0, worst_norm = 0.0;
    SolverConfig cfg;
    cfg.tol = 1e-13;
    cfg.max_iters = 5000;
    cfg.check = ContractionCheck::skip;
    bool all_outside = true;
    for (int k = 0; k < 10; ++k) {
        const auto op = random_operator(rng, 20);
        auto p = random_params(rng, 5, 6, 3, 0.9);
        // similarity by a skewed diagonal keeps rho(|W|) <= 0.9 but pushes ||W||_inf above 1
        std::vector<double> s(6);
        for (double& x : s) x = std::exp(uniform(rng, -2.0, 2.0));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) p.w(i, j) *= s[i] / s[j];
        p.kappa = 0.0;
        all_outside = all_outside && max_row_abs_sum(p.w) > 1.0;
        const DenseMatrix x = random_matrix(20, 5, rng);
        const auto base = forward(x, op, p, Activation::relu(), cfg);
        const auto q = rebalanced(p);
        worst_norm = std::max(worst_norm, max_row_abs_sum(q.w));
        const auto eq = forward(x, op, q, Activation::relu(), cfg);
        worst = std::max(worst, max_abs_diff(base.prediction.logits, eq.prediction.logits));
        for (double alpha : {0.25, 0.5, 0.9}) {
            const auto scaled = forward(x, op, rescaled(p, alpha), Activation::relu(), cfg);
            worst_alpha = std::max(worst_alpha, max_abs_diff(base.prediction.logits, scaled.prediction.logits));
        }
    }
    r.measured = worst;
    r.passed = worst <= 1e-9 && worst_norm < 1.0 && all_outside;
    r.detail = "diagonal rebalancing: logit diff " + format_double(worst) + ", ||W'||_inf " + format_double(worst_norm) +
               "; uniform alpha-scaling logit diff " + format_double(worst_alpha) + " (not invariant)";
    return r;
}

CheckResult check_gradients(const Options& opts) {
    CheckResult r{"gradients", false, 0.0, 1.0, {},
                  {"forward", "cross_entropy_masked", "readout_upstream", "solve_adjoint", "parameter_gradients"}};
    Rng rng = substream(opts.seed, "verify/gradients");
    SolverConfig cfg;
    cfg.tol = 1e-13;
    cfg.max_iters = 5000;
    const Activation act = Activation::tanh();
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = uniform_size(rng, 5, 20);
        const std::size_t d = uniform_size(rng, 2, 8), dh = uniform_size(rng, 2, 8), dout = uniform_size(rng, 2, 8);
        const auto op = random_operator(rng, n);
        auto p = random_params(rng, d, dh, dout, uniform(rng, 0.3, 0.8));
        const DenseMatrix x = random_matrix(n, d, rng);
        std::vector<int> labels(n);
        for (int& y : labels) y = static_cast<int>(uniform_size(rng, 0, dout - 1));
        std::vector<std::size_t> mask;
        for (std::size_t i = 0; i < n; ++i)
            if (uniform(rng, 0.0, 1.0) < 0.6) mask.push_back(i);
        if (mask.empty()) mask.push_back(0);

        auto loss_of = [&](const ModelParams& q) {
            return cross_entropy_masked(forward(x, op, q, act, cfg).prediction, labels, mask).loss;
        };
        const auto fwd = forward(x, op, p, act, cfg);
        const auto loss = cross_entropy_masked(fwd.prediction, labels, mask);
        const auto adj = solve_adjoint(op, p.w, fwd.equilibrium, act, readout_upstream(loss.grad_logits, p.theta2), cfg);
        const auto g = parameter_gradients(x, op, fwd.equilibrium, adj, loss.grad_logits, p.theta2);

        auto compare = [&](std::span<double> param, std::span<const double> grad) {
            constexpr double eps = 1e-5;
            for (std::size_t j = 0; j < param.size(); ++j) {
                const double keep = param[j];
                param[j] = keep + eps;
                const double up = loss_of(p);
                param[j] = keep - eps;
                const double down = loss_of(p);
                param[j] = keep;
                const double fd = (up - down) / (2.0 * eps);
                const double allowed = std::max(1e-4 * std::max(std::abs(fd), std::abs(grad[j])), 1e-7);
                worst = std::max(worst, std::abs(fd - grad[j]) / allowed);
            }
        };
        compare(p.w.values(), g.grad_w.values());
        compare(p.theta1.values(), g.grad_theta1.values());
        compare(p.theta2.values(), g.grad_theta2.values());
        compare(std::span<double>(p.b), std::span<const double>(g.grad_b));
    }
    r.measured = worst;
    r.passed = worst <= 1.0;
    r.detail = "worst |fd - adjoint| / max(1e-4 rel, 1e-7 abs) = " + format_double(worst) + " over 50 instances";
    return r;
}

CheckResult check_projection(const Options& opts) {
    CheckResult r{"projection", true, 0.0, 1e-12, {}, {"project_inf_ball", "max_row_abs_sum"}};
    Rng rng = substream(opts.seed, "verify/projection");
    double worst_feas = -INFINITY;
    std::size_t beaten = 0;
    bool idempotent = true;
    for (int k = 0; k < 20; ++k) {
        const DenseMatrix w = random_matrix(3, 3, rng, -1.5, 1.5);
        const double kappa = uniform(rng, 0.05, 0.95);
        const DenseMatrix p = project_inf_ball(w, kappa);
        worst_feas = std::max(worst_feas, max_row_abs_sum(p) - kappa);
        idempotent = idempotent && project_inf_ball(p, kappa) == p;
        const double best = frobenius_distance(p, w);
        for (int c = 0; c < 10000; ++c) {
            DenseMatrix cand = c % 2 ? random_matrix(3, 3, rng) : p + random_matrix(3, 3, rng, -0.05, 0.05);
            for (std::size_t i = 0; i < 3; ++i) {
                auto row = cand.row(i);
                double l1 = 0.0;
                for (double v : row) l1 += std::abs(v);
                const double target = c % 2 ? kappa * uniform(rng, 0.0, 1.0) : std::min(l1, kappa);
                if (l1 > 0.0)
                    for (double& v : row) v *= target / l1;
            }
            if (frobenius_distance(cand, w) < best - 1e-12) ++beaten;
        }
    }
    r.measured = worst_feas;
    r.passed = worst_feas <= 1e-12 && idempotent && beaten == 0;
    r.detail = "max ||W+||_inf - kappa " + format_double(worst_feas) + ", idempotent " + (idempotent ? "yes" : "no") +
               ", candidates closer than the projection " + std::to_string(beaten);
    return r;
}

CheckResult check_bound(const Options&) {
    CheckResult r{"bound", true, c0_constant(), 5.05, {}, {"generalization_bound", "c0_constant"}};
    // second evaluation of the closed form in long double
    auto reference = [](const BoundInputs& in) {
        const long double s = in.s, u = in.u;
        const long double p = 1.0L / s + 1.0L / u;
        const long double q = (s + u) / ((s + u - 0.5L) * (1.0L - 1.0L / (2.0L * std::max(s, u))));
        const long double c0 = std::sqrt(32.0L * (std::log(4.0L) + 1.0L) / 3.0L);
        BoundTerms t;
        t.complexity = static_cast<double>(std::sqrt(2.0L) * in.rho2 * in.c_ell *
                                           (in.rho1 * in.c_x + std::sqrt(static_cast<long double>(in.d)) * in.c_b) /
                                           ((1.0L - in.kappa) * std::sqrt(s + u)));
        t.sampling = static_cast<double>(c0 * p * std::sqrt(std::min(s, u)));
        t.confidence = static_cast<double>(std::sqrt(p * q / 2.0L * std::log(1.0L / in.delta)));
        return t;
    };
    BoundInputs in;
    in.s = 1000;
    in.u = 1000;
    in.d = 100;
    const auto got = generalization_bound(in);
    const auto want = reference(in);
    const double diff = std::max({std::abs(got.complexity - want.complexity), std::abs(got.sampling - want.sampling),
                                  std::abs(got.confidence - want.confidence)});
    double shrink = 0.0;
    for (double s : {10.0, 100.0, 1000.0}) {
        BoundInputs a = in, b = in;
        a.s = a.u = s;
        b.s = b.u = 2 * s;
        shrink = std::max(shrink, std::abs(generalization_bound(b).complexity / generalization_bound(a).complexity -
                                           1.0 / std::sqrt(2.0)));
    }
    bool monotone = true;
    double prev = INFINITY;
    for (double s = 1; s <= in.u; s *= 1.5) {
        BoundInputs a = in;
        a.s = s;
        const double v = generalization_bound(a).total();
        monotone = monotone && v <= prev;
        prev = v;
    }
    prev = -INFINITY;
    for (double kappa = 0.0; kappa < 0.99; kappa += 0.05) {
        BoundInputs a = in;
        a.kappa = kappa;
        const double v = generalization_bound(a).total();
        monotone = monotone && v > prev;
        prev = v;
    }
    r.passed = r.measured < 5.05 && diff <= 1e-12 && shrink <= 1e-9 && monotone;
    r.detail = "c0 " + format_double(r.measured) + ", term mismatch " + format_double(diff) + ", sqrt2 shrink error " +
               format_double(shrink) + ", monotone " + (monotone ? "yes" : "no");
    return r;
}

CheckResult check_oversmoothing(const Options& opts) {
    CheckResult r{"oversmoothing", false, 0.0, 1e-8, {}, {"oversmoothing_profile", "unroll_explicit", "solve_forward", "row_dispersion"}};
    Rng rng = substream(opts.seed, "verify/oversmoothing");
    synthetic::HypergraphShape shape;
    shape.nodes = 30;
    const auto op = build_operator(synthetic::random_hypergraph(shape, rng));
    const std::size_t d = 4;
    ModelParams p;
    p.kappa = 0.9;
    p.w = 0.9 * DenseMatrix::identity(d);
    p.theta1 = DenseMatrix::identity(d);
    p.theta2 = DenseMatrix::identity(d);
    p.b.assign(d, 0.0);
    const DenseMatrix x = random_matrix(30, d, rng);
    const std::vector<std::size_t> depths{1, 2, 4, 8, 16, 32, 64};
    const auto rows = oversmoothing_profile(op, p, Activation::identity(), x, depths);
    bool decreasing = true;
    for (std::size_t k = 1; k < rows.size(); ++k)
        decreasing = decreasing && rows[k].explicit_dispersion <= rows[k - 1].explicit_dispersion;
    const double last = rows.back().explicit_dispersion;
    const double implicit = rows.back().implicit_dispersion;
    const auto sol = solve_forward(op, p.w, affine_input(x, p), Activation::identity());
    bool monotone_residuals = true;
    for (std::size_t t = 1; t < sol.residuals.size(); ++t)
        monotone_residuals = monotone_residuals && sol.residuals[t] <= sol.residuals[t - 1];
    r.measured = implicit;
    r.passed = decreasing && last <= 0.01 * rows.front().explicit_dispersion && implicit > 1e-8 && monotone_residuals;
    r.detail = "explicit dispersion " + format_double(rows.front().explicit_dispersion) + " -> " + format_double(last) +
               " over depth 1..64, implicit " + format_double(implicit) + ", residuals monotone " +
               (monotone_residuals ? "yes" : "no");
    return r;
}

const std::map<std::string, std::function<CheckResult(const Options&)>, std::less<>>& registry() {
    static const std::map<std::string, std::function<CheckResult(const Options&)>, std::less<>> checks{
        {"rowsum", check_rowsum},         {"rate", check_rate},           {"uniqueness", check_uniqueness},
        {"nonconstant", check_nonconstant}, {"expressivity", check_expressivity}, {"scaling", check_scaling},
        {"gradients", check_gradients},   {"projection", check_projection}, {"bound", check_bound},
        {"oversmoothing", check_oversmoothing},
    };
    return checks;
}

} // namespace

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"rowsum",  "rate",    "uniqueness", "nonconstant", "expressivity",
                                                "scaling", "gradients", "projection", "bound",       "oversmoothing"};
    return names;
}

CheckResult run_check(std::string_view name, const Options& opts) {
    const auto& reg = registry();
    const auto it = reg.find(name);
    if (it == reg.end()) throw ValidationError("unknown check '" + std::string(name) + "'");
    return it->second(opts);
}

std::vector<CheckResult> run_all(const Options& opts) {
    std::vector<CheckResult> out;
    for (const auto& name : check_names()) out.push_back(run_check(name, opts));
    return out;
}

} // namespace ihgnn::verify
