#include "doctest.h"

#include "../support/oracles.hpp"

#include "ihgnn/equilibrium.hpp"
#include "ihgnn/error.hpp"
#include "ihgnn/synthetic.hpp"

#include <cmath>
#include <sstream>

using namespace ihgnn;

namespace {

PropagationOperator single_node() { return build_operator(Hypergraph(1, {{0}}, {1.0})); }

PropagationOperator random_op(Rng& rng, std::size_t n) {
    synthetic::HypergraphShape shape;
    shape.nodes = n;
    shape.extra_edges = n;
    return build_operator(synthetic::random_hypergraph(shape, rng));
}

} // namespace

TEST_CASE("activation kinds") {
    CHECK(Activation::relu().value(-1.0) == 0.0);
    CHECK(Activation::relu().derivative(0.0) == 0.0);
    CHECK(Activation::leaky_relu(0.1).value(-2.0) == doctest::Approx(-0.2));
    CHECK(Activation::leaky_relu(0.1).derivative(0.0) == 0.1);
    CHECK(Activation::tanh().derivative(0.0) == 1.0);
    CHECK(Activation::parse("leaky_relu:0.25") == Activation::leaky_relu(0.25));
    CHECK(Activation::parse("identity") == Activation::identity());
    CHECK_THROWS_AS(Activation::parse("sigmoid"), ValidationError);
    CHECK_THROWS_AS(Activation::leaky_relu(0.0), ValidationError);
    CHECK_THROWS_AS(Activation::leaky_relu(1.5), ValidationError);
    CHECK_FALSE(Activation::tanh().positively_homogeneous());
    CHECK_FALSE(Activation::relu().strictly_increasing());
    CHECK(Activation::leaky_relu(0.5).positively_homogeneous());
    CHECK(Activation::leaky_relu(0.5).strictly_increasing());
}

TEST_CASE("property: activations are 1-Lipschitz") {
    Rng rng = substream(31, "test/lipschitz");
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.3), Activation::tanh(), Activation::identity()})
        for (int k = 0; k < 2000; ++k) {
            const double a = u(rng), b = u(rng);
            CHECK(std::abs(act.value(a) - act.value(b)) <= std::abs(a - b) + 1e-15);
        }
}

TEST_CASE("solve_forward examples") {
    const auto op = single_node();
    auto sol = solve_forward(op, DenseMatrix::from_rows({{0.5}}), DenseMatrix::from_rows({{1.0}}), Activation::identity(),
                             {1e-12, 300});
    CHECK(sol.converged);
    CHECK(std::abs(sol.z_star(0, 0) - 2.0) <= 1e-11);

    Rng rng = substream(32, "test/forward-examples");
    const auto g = random_op(rng, 15);
    const auto x = synthetic::random_matrix(15, 4, rng);
    sol = solve_forward(g, DenseMatrix(4, 4), x, Activation::tanh(), {1e-12, 300});
    DenseMatrix expect = x;
    Activation::tanh().apply_inplace(expect);
    CHECK(sol.z_star == expect);
    CHECK(sol.residuals.size() == 2); // one productive step, one confirming zero step
    CHECK(sol.residuals.back() == 0.0);

    sol = solve_forward(g, synthetic::random_weight(4, 0.9, rng), DenseMatrix(15, 4), Activation::relu());
    CHECK(sol.z_star == DenseMatrix(15, 4));
}

TEST_CASE("solve_forward contraction check and errors") {
    const auto op = single_node();
    const auto big = DenseMatrix::from_rows({{1.2}});
    const auto x = DenseMatrix::from_rows({{1.0}});
    CHECK_THROWS_AS(solve_forward(op, big, x, Activation::identity(), {1e-6, 10, ContractionCheck::strict}), SolverError);
    try {
        solve_forward(op, big, x, Activation::identity(), {1e-6, 10, ContractionCheck::strict});
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).find("1.2") != std::string::npos);
    }
    const auto warned = solve_forward(op, big, x, Activation::identity(), {1e-6, 10, ContractionCheck::warn});
    CHECK_FALSE(warned.converged);
    CHECK(warned.iterations == 10);
    CHECK(std::abs(warned.lambda_abs_w - 1.2) <= 1e-6);
    CHECK_THROWS_AS(solve_forward(op, DenseMatrix::from_rows({{1e200}}), DenseMatrix::from_rows({{1e200}}),
                                  Activation::identity(), {1e-6, 50, ContractionCheck::skip}),
                    SolverError);
    CHECK_THROWS_AS(solve_forward(op, DenseMatrix(2, 2), x, Activation::identity()), ValidationError);
}

TEST_CASE("convergence_rate_fit") {
    const std::vector<double> geo{1, 0.5, 0.25, 0.125};
    CHECK(std::abs(convergence_rate_fit(geo) - 0.5) <= 1e-9);
    CHECK_THROWS_AS(convergence_rate_fit(std::vector<double>{1, 0.5, 1e-20, 1e-20}), ValidationError);

    const auto op = single_node();
    const auto sol = solve_forward(op, DenseMatrix::from_rows({{0.5}}), DenseMatrix::from_rows({{1.0}}),
                                   Activation::identity(), {1e-13, 300});
    CHECK(std::abs(convergence_rate_fit(sol.residuals) - 0.5) <= 1e-6);

    Rng rng = substream(33, "test/rate");
    const auto g = random_op(rng, 30);
    const auto w = synthetic::random_weight(6, 0.9, rng);
    const auto r = solve_forward(g, w, synthetic::random_matrix(30, 6, rng), Activation::tanh(), {1e-12, 2000});
    CHECK(convergence_rate_fit(r.residuals) <= 0.9 + 0.02);
}

TEST_CASE("unroll_explicit") {
    Rng rng = substream(34, "test/unroll");
    const auto op = random_op(rng, 12);
    const auto x = synthetic::random_matrix(12, 3, rng);
    const auto m = op.m.to_dense();
    CHECK(oracle::max_abs_diff(unroll_explicit(op, DenseMatrix::identity(3), x, Activation::identity(), 1),
                               oracle::matmul(m, x)) <= 1e-14);
    const auto w = synthetic::random_matrix(3, 3, rng);
    const auto two = oracle::matmul(oracle::matmul(m, oracle::matmul(oracle::matmul(m, x), w)), w);
    CHECK(oracle::max_abs_diff(unroll_explicit(op, w, x, Activation::identity(), 2), two) <= 1e-13);
    CHECK_THROWS_AS(unroll_explicit(op, w, x, Activation::identity(), 0), ValidationError);
}

TEST_CASE("explicit unroll oversmooths on a connected 10-node hypergraph") {
    Rng rng = substream(35, "test/oversmooth");
    synthetic::HypergraphShape shape;
    shape.nodes = 10;
    shape.extra_edges = 8;
    const auto op = build_operator(synthetic::random_hypergraph(shape, rng));
    const auto x = synthetic::random_matrix(10, 3, rng);
    auto variance = [](const DenseMatrix& z) {
        long double total = 0;
        for (std::size_t j = 0; j < z.cols(); ++j) {
            long double mean = 0, sq = 0;
            for (std::size_t i = 0; i < z.rows(); ++i) mean += z(i, j);
            mean /= z.rows();
            for (std::size_t i = 0; i < z.rows(); ++i) sq += (z(i, j) - mean) * (z(i, j) - mean);
            total += sq / z.rows();
        }
        return static_cast<double>(total);
    };
    // D^{-1/2}-rescaled rows collapse to a common vector; compare the normalized output
    auto normalized = [&](DenseMatrix z) {
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (double& v : z.row(i)) v /= std::sqrt(op.node_degrees[i]);
        return z;
    };
    double prev = variance(normalized(unroll_explicit(op, DenseMatrix::identity(3), x, Activation::identity(), 8)));
    for (std::size_t layers = 16; layers <= 256; layers *= 2) {
        const double cur = variance(normalized(unroll_explicit(op, DenseMatrix::identity(3), x, Activation::identity(), layers)));
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("property: uniqueness from distant inits and the geometric envelope") {
    Rng rng = substream(36, "test/uniqueness");
    for (int k = 0; k < 10; ++k) {
        const auto op = random_op(rng, 25);
        const auto w = synthetic::random_weight(5, 0.5 + 0.04 * k, rng);
        const auto xt = synthetic::random_matrix(25, 5, rng);
        SolverConfig cfg{1e-9, 5000};
        auto a0 = synthetic::random_matrix(25, 5, rng);
        auto b0 = synthetic::random_matrix(25, 5, rng);
        DenseMatrix diff = b0 - a0;
        diff *= 10.0 / frobenius_norm(diff);
        b0 = a0 + diff;
        const auto a = solve_forward(op, w, xt, Activation::tanh(), cfg, &a0);
        const auto b = solve_forward(op, w, xt, Activation::tanh(), cfg, &b0);
        CHECK(frobenius_distance(a.z_star, b.z_star) <= 10 * cfg.tol);

        const auto z = solve_forward(op, w, xt, Activation::tanh(), cfg);
        const double kappa = a.lambda_abs_w;
        for (std::size_t t = 1; t < z.residuals.size(); ++t)
            CHECK(z.residuals[t] <= std::pow(kappa, static_cast<double>(t)) * z.residuals[0] * 1.05 + 1e-15);
        for (std::size_t t = 0; t + 1 < z.residuals.size(); ++t) CHECK(z.residuals[t] > 0.0);
        DenseMatrix fixed = z.pre_activation;
        Activation::tanh().apply_inplace(fixed);
        CHECK(frobenius_distance(fixed, z.z_star) <= cfg.tol);
    }
}

TEST_CASE("property: halving tol never increases the fixed-point defect") {
    Rng rng = substream(37, "test/tol-monotone");
    for (int k = 0; k < 10; ++k) {
        const auto op = random_op(rng, 20);
        const auto w = synthetic::random_weight(4, 0.9, rng);
        const auto xt = synthetic::random_matrix(20, 4, rng);
        double prev = INFINITY;
        for (double tol = 1e-3; tol >= 1e-10; tol /= 2) {
            const auto s = solve_forward(op, w, xt, Activation::tanh(), {tol, 5000});
            DenseMatrix fixed = s.pre_activation;
            Activation::tanh().apply_inplace(fixed);
            const double defect = frobenius_distance(fixed, s.z_star);
            CHECK(defect <= prev);
            prev = defect;
        }
    }
}

TEST_CASE("residual CSV") {
    std::ostringstream out;
    const std::vector<double> r{0.5, 0.25};
    write_residual_csv(out, r);
    CHECK(out.str() == "iteration,residual\n1,0.5\n2,0.25\n");
}
