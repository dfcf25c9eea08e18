#pragma once

#include "ihgnn/data.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"
#include "ihgnn/rng.hpp"

#include <vector>

namespace ihgnn::synthetic {

struct HypergraphShape {
    std::size_t nodes = 30;
    std::size_t extra_edges = 20;  // on top of the spanning edges when connected
    std::size_t max_edge_size = 4;
    double min_weight = 0.5;
    double max_weight = 2.0;
    bool connected = true;
};

// Admissible by construction: every node lies on at least one hyperedge.
Hypergraph random_hypergraph(const HypergraphShape& shape, Rng& rng);

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0);

// Uniform entries rescaled so that ||W||_inf equals `norm_inf` exactly.
DenseMatrix random_weight(std::size_t d, double norm_inf, Rng& rng);

struct NodeProblem {
    Hypergraph graph;
    DenseMatrix features;
    std::vector<int> labels;
    SplitSpec splits;
};

// 20 nodes in two blocks of 10, hyperedges inside blocks only, features that
// a linear classifier separates. 10 train, 4 val, 6 test nodes.
NodeProblem toy_two_block(std::uint64_t seed);

struct CitationShape {
    std::size_t nodes = 300;
    std::size_t classes = 3;
    std::size_t vocabulary = 50;
    std::size_t words_per_node = 8;
    std::size_t citations_per_node = 3;
    double homophily = 0.85; // chance a citation stays inside the class
};

// Planted-partition corpus in the same shape the citation loader produces.
CitationDataset citation_corpus(const CitationShape& shape, std::uint64_t seed);

} // namespace ihgnn::synthetic
