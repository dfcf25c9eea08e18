#include "doctest.h"

#include "../support/oracles.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/synthetic.hpp"

#include <sstream>

using namespace ihgnn;

TEST_CASE("validate_admissible") {
    CHECK(validate_admissible(Hypergraph(2, {{0, 1}}, {1.0})).admissible());
    const auto isolated = validate_admissible(Hypergraph(2, {{0}}, {1.0}));
    CHECK_FALSE(isolated.admissible());
    CHECK(isolated.zero_degree_nodes == std::vector<std::size_t>{1});
    const auto negative = validate_admissible(Hypergraph(2, {{0, 1}}, {-0.5}));
    CHECK(negative.negative_weight_edges == std::vector<std::size_t>{0});
    CHECK(negative.first_violation().find("negative") != std::string::npos);
}

TEST_CASE("build_operator examples") {
    auto op = build_operator(Hypergraph(2, {{0, 1}}, {1.0}));
    CHECK(op.m.to_dense() == DenseMatrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
    op = build_operator(Hypergraph(1, {{0}}, {1.0}));
    CHECK(op.m.to_dense() == DenseMatrix::from_rows({{1.0}}));
    CHECK(row_stochastic_check(op) == 0.0);

    const Hypergraph g(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
    op = build_operator(g);
    CHECK(oracle::max_abs_diff(op.m.to_dense(), oracle::dense_operator(g)) <= 1e-15);
    CHECK(row_stochastic_check(op) <= 1e-10);
    CHECK(op.node_degrees == std::vector<double>{1, 2, 1});
    CHECK(op.edge_sizes == std::vector<std::size_t>{2, 2});
}

TEST_CASE("build_operator rejects inadmissible hypergraphs") {
    CHECK_THROWS_AS(build_operator(Hypergraph(3, {{0, 1}}, {1.0})), ValidationError);
    CHECK_THROWS_AS(build_operator(Hypergraph(2, {{0, 1}}, {-1.0})), ValidationError);
    CHECK_NOTHROW(build_operator(with_self_loops(Hypergraph(3, {{0, 1}}, {1.0}))));
}

TEST_CASE("construction validation and normalization") {
    CHECK_THROWS_AS(Hypergraph(2, {{}}, {1.0}), ValidationError);
    CHECK_THROWS_AS(Hypergraph(2, {{0, 2}}, {1.0}), ValidationError);
    CHECK_THROWS_AS(Hypergraph(2, {{0, 1}}, {1.0, 2.0}), ValidationError);
    const Hypergraph g(3, {{1, 0, 1}, {0, 1}, {2}}, {1.0, 2.0, 0.5});
    CHECK(g.edge_count() == 2);
    CHECK(g.normalization().collapsed_members == 1);
    CHECK(g.normalization().merged_edges == 1);
    CHECK(g.edge(0).size() == 2);
    CHECK(g.weight(0) == 3.0);
    CHECK(g.node_degrees() == std::vector<double>{3.0, 3.0, 0.5});
}

TEST_CASE("with_self_loops adds one singleton per isolated node") {
    std::size_t added = 0;
    const auto g = with_self_loops(Hypergraph(4, {{0, 1}}, {1.0}), &added);
    CHECK(added == 2);
    CHECK(g.edge_count() == 3);
    CHECK(validate_admissible(g).admissible());
}

TEST_CASE("serialization round-trips bit-exactly") {
    Rng rng = substream(21, "test/hg-io");
    for (int k = 0; k < 10; ++k) {
        const auto g = synthetic::random_hypergraph({40, 30, 5, 0.1, 3.0, true}, rng);
        std::stringstream io;
        write_hypergraph(io, g);
        const auto back = read_hypergraph(io);
        CHECK(back == g);
    }
    std::istringstream bad("# nodes 2\n1.0 0 5\n");
    CHECK_THROWS_AS(read_hypergraph(bad), ValidationError);
}

TEST_CASE("property: operator equals the dense formula, is symmetric, and has lambda_max 1") {
    Rng rng = substream(22, "test/hg-operator");
    for (int k = 0; k < 25; ++k) {
        synthetic::HypergraphShape shape;
        shape.nodes = 5 + k * 2;
        shape.extra_edges = shape.nodes;
        shape.max_edge_size = 6;
        shape.connected = k % 2 == 0;
        const auto g = synthetic::random_hypergraph(shape, rng);
        const auto op = build_operator(g);
        const auto dense = op.m.to_dense();
        CHECK(oracle::max_abs_diff(dense, oracle::dense_operator(g)) <= 1e-12);
        CHECK(frobenius_distance(dense, dense.transposed()) <= 1e-12);
        CHECK(row_stochastic_check(op) <= 1e-10);
        const auto p = oracle::dense_random_walk(g);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            long double s = 0;
            for (double v : p.row(i)) s += v;
            CHECK(std::abs(static_cast<double>(s) - 1.0) <= 1e-12);
        }
        const auto lam = power_iteration_abs(op.m, {2000, 1e-12});
        CHECK(lam.value <= 1.0 + 1e-8);
        // M is nonnegative, so lambda_max(|M|) = lambda_max(M)
        CHECK(std::abs(lam.value - 1.0) <= 1e-6);
    }
}
