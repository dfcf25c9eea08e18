#include "doctest.h"

#include "../support/oracles.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/model.hpp"
#include "ihgnn/synthetic.hpp"

#include <cmath>
#include <sstream>

using namespace ihgnn;

namespace {

ModelParams random_params(Rng& rng, std::size_t d, std::size_t dh, std::size_t dout, double norm) {
    ModelParams p;
    p.kappa = 0.95;
    p.w = synthetic::random_weight(dh, norm, rng);
    p.theta1 = synthetic::random_matrix(d, dh, rng);
    p.theta2 = synthetic::random_matrix(dh, dout, rng);
    p.b.resize(dh);
    for (double& v : p.b) v = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    return p;
}

PropagationOperator random_op(Rng& rng, std::size_t n) {
    synthetic::HypergraphShape shape;
    shape.nodes = n;
    shape.extra_edges = n;
    return build_operator(synthetic::random_hypergraph(shape, rng));
}

} // namespace

TEST_CASE("affine_input") {
    Rng rng = substream(51, "test/affine");
    ModelParams p = random_params(rng, 2, 2, 2, 0.5);
    const auto x = synthetic::random_matrix(3, 2, rng);
    p.theta1 = DenseMatrix::identity(2);
    p.b = {0.0, 0.0};
    CHECK(affine_input(x, p) == x);
    p.b = {1.0, 1.0};
    CHECK(affine_input(DenseMatrix(3, 2), p) == DenseMatrix(3, 2, 1.0));
    p = random_params(rng, 2, 2, 2, 0.5);
    DenseMatrix expect = oracle::matmul(x, p.theta1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) expect(i, j) += p.b[j];
    CHECK(oracle::max_abs_diff(affine_input(x, p), expect) <= 1e-15);
    CHECK_THROWS_AS(affine_input(DenseMatrix(3, 5), p), ValidationError);
}

TEST_CASE("params validation") {
    Rng rng = substream(52, "test/params");
    auto p = random_params(rng, 3, 4, 2, 0.5);
    CHECK_NOTHROW(p.validate());
    p.kappa = 1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.kappa = 0.5;
    p.b.pop_back();
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("forward examples") {
    Rng rng = substream(53, "test/forward");
    const auto op = random_op(rng, 12);
    auto p = random_params(rng, 3, 4, 5, 0.8);
    p.theta2 = DenseMatrix(4, 5);
    const auto x = synthetic::random_matrix(12, 3, rng);
    const auto fwd = forward(x, op, p, Activation::relu());
    for (std::size_t i = 0; i < 12; ++i)
        for (double v : fwd.prediction.probabilities.row(i)) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));

    ModelParams s;
    s.w = DenseMatrix::from_rows({{0.5}});
    s.theta1 = DenseMatrix::identity(1);
    s.theta2 = DenseMatrix::identity(1);
    s.b = {0.0};
    s.kappa = 0.5;
    const auto one = build_operator(Hypergraph(1, {{0}}, {1.0}));
    const auto r = forward(DenseMatrix::from_rows({{1.0}}), one, s, Activation::identity(), {1e-13, 300});
    CHECK(std::abs(r.prediction.logits(0, 0) - 2.0) <= 1e-12);
}

TEST_CASE("property: probabilities lie on the simplex") {
    Rng rng = substream(54, "test/simplex");
    for (int k = 0; k < 20; ++k) {
        DenseMatrix logits = synthetic::random_matrix(10, 4, rng, -50.0, 50.0);
        if (k == 0) logits(0, 0) = 800.0;
        const auto pred = make_prediction(logits);
        for (std::size_t i = 0; i < 10; ++i) {
            long double s = 0;
            for (double v : pred.probabilities.row(i)) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                s += v;
            }
            CHECK(std::abs(static_cast<double>(s) - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("cross_entropy_masked") {
    const std::vector<int> labels{0, 1, 1};
    auto perfect = make_prediction(DenseMatrix::from_rows({{50, -50}, {-50, 50}, {-50, 50}}));
    const std::vector<std::size_t> all{0, 1, 2};
    CHECK(cross_entropy_masked(perfect, labels, all).loss <= 1e-6);
    auto uniform = make_prediction(DenseMatrix(3, 2));
    CHECK(std::abs(cross_entropy_masked(uniform, labels, all).loss - std::log(2.0)) <= 1e-15);
    CHECK_THROWS_AS(cross_entropy_masked(uniform, labels, {}), ValidationError);

    Rng rng = substream(55, "test/ce");
    const auto logits = synthetic::random_matrix(3, 2, rng, -3, 3);
    const std::vector<std::size_t> mask{0, 2};
    const auto r = cross_entropy_masked(make_prediction(logits), labels, mask);
    long double expect = 0;
    for (auto i : mask) {
        const long double a = logits(i, 0), b = logits(i, 1);
        const long double z = std::log(std::exp(a) + std::exp(b));
        expect += z - logits(i, labels[i]);
    }
    expect /= mask.size();
    CHECK(std::abs(r.loss - static_cast<double>(expect)) <= 1e-14);
    for (double v : r.grad_logits.row(1)) CHECK(v == 0.0);
    const double p01 = std::exp(logits(0, 1)) / (std::exp(logits(0, 0)) + std::exp(logits(0, 1)));
    CHECK(std::abs(r.grad_logits(0, 1) - p01 / 2) <= 1e-15);
}

TEST_CASE("project_inf_ball examples") {
    const auto feasible = DenseMatrix::from_rows({{0.2, -0.3}, {0.1, 0.1}});
    CHECK(project_inf_ball(feasible, 0.9) == feasible);
    const auto r = project_inf_ball(DenseMatrix::from_rows({{0.8, -0.6}}), 1.0);
    CHECK(std::abs(r(0, 0) - 0.6) <= 1e-15);
    CHECK(std::abs(r(0, 1) + 0.4) <= 1e-15);
    Rng rng = substream(56, "test/proj0");
    CHECK(project_inf_ball(synthetic::random_matrix(4, 4, rng), 0.0) == DenseMatrix(4, 4));
    CHECK_THROWS_AS(project_inf_ball(feasible, -0.1), ValidationError);
}

TEST_CASE("property: projection is feasible, idempotent and Frobenius-optimal") {
    Rng rng = substream(57, "test/projection");
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const double kappa = 0.1 + 0.04 * k;
        const auto w = synthetic::random_matrix(3, 3, rng, -2.0, 2.0);
        const auto p = project_inf_ball(w, kappa);
        CHECK(max_row_abs_sum(p) <= kappa + 1e-12);
        CHECK(project_inf_ball(p, kappa) == p);
        const double best = frobenius_distance(p, w);
        int closer = 0;
        for (int c = 0; c < 10000; ++c) {
            DenseMatrix cand(3, 3);
            for (std::size_t i = 0; i < 3; ++i) {
                double l1 = 0;
                for (double& v : cand.row(i)) l1 += std::abs(v = u(rng));
                const double radius = kappa * std::abs(u(rng));
                for (double& v : cand.row(i)) v *= radius / l1;
            }
            if (frobenius_distance(cand, w) < best - 1e-12) ++closer;
        }
        CHECK(closer == 0);
    }
}

TEST_CASE("uniform alpha-scaling does not preserve logits") {
    // Z = phi(M Z (aW) + a X~) has solution a Z* only when M Z* W vanishes.
    const auto op = build_operator(Hypergraph(1, {{0}}, {1.0}));
    ModelParams p;
    p.w = DenseMatrix::from_rows({{0.5}});
    p.theta1 = DenseMatrix::identity(1);
    p.theta2 = DenseMatrix::identity(1);
    p.b = {0.0};
    p.kappa = 0.5;
    const auto x = DenseMatrix::from_rows({{1.0}});
    const SolverConfig cfg{1e-14, 500};
    const double base = forward(x, op, p, Activation::relu(), cfg).prediction.logits(0, 0);
    const auto q = rescaled(p, 0.5);
    CHECK(q.w(0, 0) == 0.25);
    CHECK(q.theta2(0, 0) == 2.0);
    const double scaled = forward(x, op, q, Activation::relu(), cfg).prediction.logits(0, 0);
    CHECK(std::abs(base - 2.0) <= 1e-12);
    CHECK(std::abs(scaled - 4.0 / 3.0) <= 1e-12);

    p.w = DenseMatrix(1, 1);
    const double flat = forward(x, op, p, Activation::relu(), cfg).prediction.logits(0, 0);
    CHECK(forward(x, op, rescaled(p, 0.5), Activation::relu(), cfg).prediction.logits(0, 0) == flat);
    CHECK_THROWS_AS(rescaled(p, 0.0), ValidationError);
}

TEST_CASE("property: diagonal rebalancing preserves logits and brings ||W||_inf below 1") {
    Rng rng = substream(58, "test/rebalance");
    std::uniform_real_distribution<double> logscale(-2.0, 2.0);
    const SolverConfig cfg{1e-13, 5000, ContractionCheck::skip};
    for (int k = 0; k < 10; ++k) {
        const auto op = random_op(rng, 20);
        auto p = random_params(rng, 5, 6, 3, 0.9);
        std::vector<double> s(6);
        for (double& v : s) v = std::exp(logscale(rng));
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) p.w(i, j) *= s[i] / s[j];
        p.kappa = 0.0;
        const auto x = synthetic::random_matrix(20, 5, rng);
        const auto q = rebalanced(p);
        CHECK(max_row_abs_sum(q.w) < 1.0);
        for (const auto& act : {Activation::relu(), Activation::leaky_relu(0.2), Activation::identity()}) {
            const auto a = forward(x, op, p, act, cfg);
            const auto b = forward(x, op, q, act, cfg);
            CHECK(oracle::max_abs_diff(a.prediction.logits, b.prediction.logits) <= 1e-9);
        }
    }
    ModelParams bad = random_params(rng, 2, 3, 2, 0.5);
    bad.w = DenseMatrix::identity(3);
    CHECK_THROWS_AS(rebalanced(bad), ValidationError);
}

TEST_CASE("property: non-constant fixed point under strictly increasing activations") {
    Rng rng = substream(59, "test/nonconstant");
    for (int k = 0; k < 20; ++k) {
        const auto op = random_op(rng, 15);
        const auto p = random_params(rng, 3, 4, 2, 0.9);
        const auto x = synthetic::random_matrix(15, 3, rng);
        const auto xt = affine_input(x, p);
        double sep = 0;
        for (std::size_t i = 0; i < 15; ++i)
            for (std::size_t j = i + 1; j < 15; ++j) {
                DenseMatrix d(1, 4);
                for (std::size_t c = 0; c < 4; ++c) d(0, c) = xt(i, c) - xt(j, c);
                sep = std::max(sep, frobenius_norm(d));
            }
        if (sep < 0.1) continue;
        for (const auto& act : {Activation::tanh(), Activation::leaky_relu(0.1)}) {
            const auto z = forward(x, op, p, act, {1e-10, 2000}).equilibrium.z_star;
            double spread = 0;
            for (std::size_t i = 0; i < 15; ++i)
                for (std::size_t j = i + 1; j < 15; ++j) {
                    long double s = 0;
                    for (std::size_t c = 0; c < 4; ++c) s += (z(i, c) - z(j, c)) * (z(i, c) - z(j, c));
                    spread = std::max(spread, static_cast<double>(std::sqrt(s)));
                }
            CHECK(spread > 1e-8);
        }
    }
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    Rng rng = substream(60, "test/ckpt");
    Checkpoint c{random_params(rng, 7, 5, 3, 0.77), Activation::leaky_relu(0.125)};
    c.params.w(0, 0) = 1.0 / 3.0;
    c.params.b[1] = -5e-300;
    std::stringstream io;
    write_checkpoint(io, c);
    CHECK(read_checkpoint(io) == c);

    std::istringstream wrong_version("ihgnn-checkpoint 99\n");
    CHECK_THROWS_AS(read_checkpoint(wrong_version), ValidationError);
    std::istringstream truncated("ihgnn-checkpoint 1\nactivation relu\nkappa 0.5\nw 2 2\n1 2\n");
    CHECK_THROWS_AS(read_checkpoint(truncated), ValidationError);
}
