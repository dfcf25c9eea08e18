#pragma once

#include "ihgnn/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ihgnn {

// Weighted hypergraph on nodes [0, n). Hyperedges are stored as sorted node
// sets; duplicate members collapse and structurally identical hyperedges merge
// (weights summed), which keeps H binary and preserves H*w.
class Hypergraph {
public:
    using Node = std::uint32_t;

    struct Normalization {
        std::size_t collapsed_members = 0; // repeated node ids dropped inside a hyperedge
        std::size_t merged_edges = 0;      // hyperedges folded into an earlier identical one
    };

    Hypergraph() = default;
    // Throws ValidationError on empty hyperedges, out-of-range nodes, non-finite
    // weights, or mismatched edge/weight counts. Sign of weights and isolated
    // nodes are left to validate_admissible().
    Hypergraph(std::size_t node_count, std::vector<std::vector<Node>> edges, std::vector<double> weights);

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    std::span<const Node> edge(std::size_t j) const { return edges_[j]; }
    double weight(std::size_t j) const { return weights_[j]; }
    const std::vector<std::vector<Node>>& edges() const noexcept { return edges_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const Normalization& normalization() const noexcept { return normalization_; }

    // Diagonal of D = Diag(H w).
    std::vector<double> node_degrees() const;

    friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ && a.weights_ == b.weights_;
    }

private:
    std::size_t node_count_ = 0;
    std::vector<std::vector<Node>> edges_;
    std::vector<double> weights_;
    Normalization normalization_;
};

struct AdmissibilityReport {
    std::vector<std::size_t> negative_weight_edges;
    std::vector<std::size_t> zero_degree_nodes;

    bool admissible() const noexcept { return negative_weight_edges.empty() && zero_degree_nodes.empty(); }
    // Human-readable description of the first violation; empty when admissible.
    std::string first_violation() const;
};

// Never throws: callers decide what to do with the findings.
AdmissibilityReport validate_admissible(const Hypergraph& g);

// Adds a weight-1 singleton hyperedge {i} for every node whose degree is zero.
Hypergraph with_self_loops(const Hypergraph& g, std::size_t* added = nullptr);

// M = D^{-1/2} H E B^{-1} H^T D^{-1/2} with the diagonals of D and B cached.
struct PropagationOperator {
    SparseMatrix m;
    std::vector<double> node_degrees;     // D
    std::vector<std::size_t> edge_sizes;  // B

    std::size_t size() const noexcept { return m.rows(); }
};

// Throws ValidationError naming the first violation when g is inadmissible.
PropagationOperator build_operator(const Hypergraph& g);

// max_i |sum_k P_ik - 1| with P = D^{-1/2} M D^{1/2}.
double row_stochastic_check(const PropagationOperator& op);

// Line format: "# nodes <n>" header, then one hyperedge per line as
// "<weight> <node> <node> ...". Weights use shortest round-trip decimals.
void write_hypergraph(std::ostream& out, const Hypergraph& g);
Hypergraph read_hypergraph(std::istream& in);
void save_hypergraph(const std::filesystem::path& path, const Hypergraph& g);
Hypergraph load_hypergraph(const std::filesystem::path& path);

} // namespace ihgnn
