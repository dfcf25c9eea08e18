#include "doctest.h"

#include "../support/oracles.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/synthetic.hpp"
#include "ihgnn/theory.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace ihgnn;

namespace {

PropagationOperator random_op(Rng& rng, std::size_t n) {
    synthetic::HypergraphShape shape;
    shape.nodes = n;
    shape.extra_edges = n;
    return build_operator(synthetic::random_hypergraph(shape, rng));
}

DenseMatrix filter_via_model(const PropagationOperator& op, const PolynomialFilter& f, const DenseMatrix& x,
                             std::size_t* iterations = nullptr) {
    const auto p = expressivity_construct(f, x.cols());
    const auto fwd = forward(x, op, p, Activation::identity(), expressivity_solver_config(f));
    if (iterations) *iterations = fwd.equilibrium.iterations;
    return fwd.prediction.logits;
}

} // namespace

TEST_CASE("expressivity construction shape") {
    const PolynomialFilter f{{0.5, -1.0, 2.0}};
    const auto p = expressivity_construct(f, 3);
    CHECK(p.hidden_dim() == 9);
    CHECK(p.input_dim() == 3);
    CHECK(p.output_dim() == 3);
    CHECK(max_row_abs_sum(p.w) == 1.0);
    CHECK(power_iteration_abs(p.w).value == 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(p.w(i, 3 + i) == 1.0);
        CHECK(p.w(3 + i, 6 + i) == 1.0);
        CHECK(p.theta2(6 + i, i) == 2.0);
    }
    CHECK_THROWS_AS(expressivity_construct(PolynomialFilter{}, 3), ValidationError);
    CHECK_THROWS_AS(expressivity_construct(f, 0), ValidationError);
}

TEST_CASE("expressivity examples") {
    Rng rng = substream(71, "test/expressivity");
    const auto op = random_op(rng, 30);
    const auto x = synthetic::random_matrix(30, 4, rng);
    CHECK(oracle::max_abs_diff(filter_via_model(op, {{1.0}}, x), x) == 0.0);
    CHECK(oracle::max_abs_diff(filter_via_model(op, {{0.0, 1.0}}, x), spmm(op.m, x)) <= 1e-15);
    for (int k = 0; k < 10; ++k) {
        const auto g = random_op(rng, 30);
        const PolynomialFilter f{{std::uniform_real_distribution<double>(-1, 1)(rng),
                                  std::uniform_real_distribution<double>(-1, 1)(rng),
                                  std::uniform_real_distribution<double>(-1, 1)(rng),
                                  std::uniform_real_distribution<double>(-1, 1)(rng)}};
        const auto xs = synthetic::random_matrix(30, 3, rng);
        std::size_t iters = 0;
        const auto got = filter_via_model(g, f, xs, &iters);
        CHECK(oracle::max_abs_diff(got, oracle::polynomial_filter(g.m.to_dense(), f.coefficients, xs)) <= 1e-8);
        CHECK(iters <= f.order() + 2); // K+1 productive steps plus one that confirms a zero residual
        CHECK(oracle::max_abs_diff(apply_polynomial_filter(g, f, xs), got) <= 1e-12);
    }
}

TEST_CASE("c0 and bound examples") {
    const long double c0 = std::sqrt(32.0L * std::log(4.0L * std::numbers::e_v<long double>) / 3.0L);
    CHECK(c0_constant() < 5.05);
    CHECK(std::abs(c0_constant() - static_cast<double>(c0)) <= 1e-15);

    BoundInputs in;
    in.s = in.u = 1000;
    in.d = 100;
    in.kappa = 0.5;
    in.delta = 0.1;
    const auto t = generalization_bound(in);
    // second, long double implementation of the closed form
    const long double s = 1000, u = 1000, P = 1 / s + 1 / u;
    const long double Q = (s + u) / ((s + u - 0.5L) * (1 - 1 / (2 * u)));
    const long double comp = std::sqrt(2.0L) * (1 + std::sqrt(100.0L)) / (0.5L * std::sqrt(s + u));
    const long double samp = c0 * P * std::sqrt(s);
    const long double conf = std::sqrt(P * Q / 2 * std::log(10.0L));
    CHECK(std::abs(t.complexity - static_cast<double>(comp)) <= 1e-12);
    CHECK(std::abs(t.sampling - static_cast<double>(samp)) <= 1e-12);
    CHECK(std::abs(t.confidence - static_cast<double>(conf)) <= 1e-12);
    CHECK(std::abs(t.total() - static_cast<double>(comp + samp + conf)) <= 1e-12);

    in.rho2 = 0;
    in.c_ell = 0;
    in.empirical_loss = 0.25;
    const auto z = generalization_bound(in);
    CHECK(z.complexity == 0.0);
    CHECK(z.total() == 0.25 + z.sampling + z.confidence);
}

TEST_CASE("bound input validation") {
    BoundInputs in;
    in.kappa = 1.0;
    CHECK_THROWS_AS(generalization_bound(in), ValidationError);
    in = {};
    in.delta = 1.0;
    CHECK_THROWS_AS(generalization_bound(in), ValidationError);
    in = {};
    in.s = 0.5;
    CHECK_THROWS_AS(generalization_bound(in), ValidationError);
}

TEST_CASE("property: bound monotonicity and sqrt2 shrinkage") {
    BoundInputs in;
    in.u = 5000;
    double prev = INFINITY;
    for (double s = 1; s <= 5000; s *= 1.7) {
        in.s = s;
        const double b = generalization_bound(in).total();
        CHECK(b <= prev);
        prev = b;
    }
    in = {};
    in.s = in.u = 300;
    prev = -INFINITY;
    for (double k = 0.0; k < 0.99; k += 0.05) {
        in.kappa = k;
        const double b = generalization_bound(in).total();
        CHECK(b > prev);
        prev = b;
    }
    for (double s = 1; s <= 1e6; s *= 3) {
        in.s = in.u = s;
        const double a = generalization_bound(in).complexity;
        in.s = in.u = 2 * s;
        const double b = generalization_bound(in).complexity;
        CHECK(std::abs(b / a - 1 / std::numbers::sqrt2) <= 1e-9);
    }
}

TEST_CASE("row_dispersion") {
    CHECK(row_dispersion(DenseMatrix(5, 3, 2.0)) == 0.0);
    CHECK(row_dispersion(DenseMatrix(1, 3, 2.0)) == 0.0);
    CHECK(row_dispersion(DenseMatrix::from_rows({{0, 0}, {3, 4}})) == 2.5);
}

TEST_CASE("oversmoothing profile examples") {
    Rng rng = substream(72, "test/oversmoothing");
    synthetic::HypergraphShape shape;
    shape.nodes = 30;
    const auto op = build_operator(synthetic::random_hypergraph(shape, rng));
    ModelParams p;
    p.kappa = 0.9;
    p.w = 0.9 * DenseMatrix::identity(3);
    p.theta1 = DenseMatrix::identity(3);
    p.theta2 = DenseMatrix::identity(3);
    p.b = {0, 0, 0};
    const std::vector<std::size_t> depths{1, 2, 4, 8, 16, 32, 64};

    // constants are preserved by M only when every node has the same degree
    std::vector<std::vector<Hypergraph::Node>> ring;
    for (Hypergraph::Node i = 0; i < 30; ++i) ring.push_back({i, (i + 1) % 30});
    const auto regular = build_operator(Hypergraph(30, ring, std::vector<double>(30, 1.0)));
    const auto flat = oversmoothing_profile(regular, p, Activation::identity(), DenseMatrix(30, 3, 1.0), depths);
    for (const auto& r : flat) {
        CHECK(r.explicit_dispersion <= 1e-15);
        CHECK(r.implicit_dispersion <= 1e-15);
    }

    const auto x = synthetic::random_matrix(30, 3, rng);
    const auto rows = oversmoothing_profile(op, p, Activation::identity(), x, depths, {1e-12, 2000});
    REQUIRE(rows.size() == depths.size());
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].explicit_dispersion < rows[i - 1].explicit_dispersion);
    CHECK(rows.back().explicit_dispersion < 1e-3);
    CHECK(rows.back().implicit_dispersion > 1e-8);

    const auto single = build_operator(Hypergraph(1, {{0}}, {1.0}));
    for (const auto& r : oversmoothing_profile(single, p, Activation::identity(), DenseMatrix(1, 3, 0.5), depths))
        CHECK(r.explicit_dispersion == 0.0);
    CHECK_THROWS_AS(oversmoothing_profile(op, p, Activation::identity(), x, std::vector<std::size_t>{}), ValidationError);

    std::ostringstream out;
    const std::vector<OversmoothingRow> one{{4, 0.5, 0.25}};
    write_oversmoothing_csv(out, one);
    CHECK(out.str() == "depth,explicit_dispersion,implicit_dispersion\n4,0.5,0.25\n");
}
