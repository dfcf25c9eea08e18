#include "ihgnn/synthetic.hpp"

#include "ihgnn/error.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace ihgnn::synthetic {

Hypergraph random_hypergraph(const HypergraphShape& shape, Rng& rng) {
    const std::size_t n = shape.nodes;
    if (n == 0) throw ValidationError("random_hypergraph: need at least one node");
    if (shape.max_edge_size == 0) throw ValidationError("random_hypergraph: max_edge_size must be positive");
    std::uniform_real_distribution<double> weight(shape.min_weight, shape.max_weight);
    std::uniform_int_distribution<std::size_t> size_dist(1, std::min(shape.max_edge_size, n));
    std::uniform_int_distribution<Hypergraph::Node> node(0, static_cast<Hypergraph::Node>(n - 1));

    std::vector<std::vector<Hypergraph::Node>> edges;
    std::vector<char> covered(n, 0);
    if (shape.connected) {
        // random tree over a shuffled order: node order[i] joins some earlier node
        std::vector<Hypergraph::Node> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        if (n == 1) edges.push_back({order[0]});
        for (std::size_t i = 1; i < n; ++i) {
            std::uniform_int_distribution<std::size_t> prev(0, i - 1);
            edges.push_back({order[i], order[prev(rng)]});
        }
        std::fill(covered.begin(), covered.end(), 1);
    }
    for (std::size_t e = 0; e < shape.extra_edges; ++e) {
        const std::size_t size = size_dist(rng);
        std::vector<Hypergraph::Node> members;
        while (members.size() < size) {
            const auto v = node(rng);
            if (std::find(members.begin(), members.end(), v) == members.end()) members.push_back(v);
        }
        for (auto v : members) covered[v] = 1;
        edges.push_back(std::move(members));
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!covered[i]) edges.push_back({static_cast<Hypergraph::Node>(i)});
    std::vector<double> weights(edges.size());
    for (double& w : weights) w = weight(rng);
    return Hypergraph(n, std::move(edges), std::move(weights));
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    DenseMatrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

DenseMatrix random_weight(std::size_t d, double norm_inf, Rng& rng) {
    DenseMatrix w = random_matrix(d, d, rng);
    const double cur = max_row_abs_sum(w);
    if (cur > 0.0) w *= norm_inf / cur;
    return w;
}

NodeProblem toy_two_block(std::uint64_t seed) {
    Rng rng = substream(seed, "toy");
    constexpr std::size_t n = 20, half = 10, d = 4;
    NodeProblem p;
    std::normal_distribution<double> noise(0.0, 0.3);
    p.features = DenseMatrix(n, d);
    p.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = i < half ? 0 : 1;
        p.labels[i] = c;
        for (std::size_t j = 0; j < d; ++j) p.features(i, j) = noise(rng);
        p.features(i, 0) += c == 0 ? 1.0 : -1.0;
        p.features(i, 1) += c == 0 ? -1.0 : 1.0;
    }
    std::vector<std::vector<Hypergraph::Node>> edges;
    std::uniform_int_distribution<std::size_t> pick(0, half - 1);
    for (std::size_t block = 0; block < 2; ++block) {
        const auto base = static_cast<Hypergraph::Node>(block * half);
        for (std::size_t i = 0; i < half; ++i)
            edges.push_back({static_cast<Hypergraph::Node>(base + i), static_cast<Hypergraph::Node>(base + (i + 1) % half)});
        for (int e = 0; e < 4; ++e) {
            std::vector<Hypergraph::Node> members;
            while (members.size() < 4) {
                const auto v = static_cast<Hypergraph::Node>(base + pick(rng));
                if (std::find(members.begin(), members.end(), v) == members.end()) members.push_back(v);
            }
            edges.push_back(std::move(members));
        }
    }
    std::vector<double> weights(edges.size(), 1.0);
    p.graph = Hypergraph(n, std::move(edges), std::move(weights));

    std::vector<std::size_t> order(half);
    for (std::size_t block = 0; block < 2; ++block) {
        std::iota(order.begin(), order.end(), block * half);
        std::shuffle(order.begin(), order.end(), rng);
        p.splits.train.insert(p.splits.train.end(), order.begin(), order.begin() + 5);
        p.splits.val.insert(p.splits.val.end(), order.begin() + 5, order.begin() + 7);
        p.splits.test.insert(p.splits.test.end(), order.begin() + 7, order.end());
    }
    std::sort(p.splits.train.begin(), p.splits.train.end());
    std::sort(p.splits.val.begin(), p.splits.val.end());
    std::sort(p.splits.test.begin(), p.splits.test.end());
    return p;
}

CitationDataset citation_corpus(const CitationShape& shape, std::uint64_t seed) {
    if (shape.nodes == 0 || shape.classes == 0 || shape.vocabulary < shape.classes)
        throw ValidationError("citation_corpus: need nodes, classes and vocabulary >= classes");
    Rng rng = substream(seed, "corpus");
    const std::size_t n = shape.nodes;
    CitationDataset ds;
    ds.features = DenseMatrix(n, shape.vocabulary);
    for (std::size_t c = 0; c < shape.classes; ++c) ds.class_names.push_back("class" + std::to_string(c));

    std::vector<std::vector<std::uint32_t>> members(shape.classes);
    const std::size_t band = shape.vocabulary / shape.classes;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_word(0, shape.vocabulary - 1);
    std::uniform_int_distribution<std::size_t> band_word(0, band - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % shape.classes;
        ds.node_ids.push_back("p" + std::to_string(i));
        ds.labels.push_back(static_cast<int>(c));
        members[c].push_back(static_cast<std::uint32_t>(i));
        for (std::size_t k = 0; k < shape.words_per_node; ++k) {
            const std::size_t word = u01(rng) < 0.7 ? c * band + band_word(rng) : any_word(rng);
            ds.features(i, word) = 1.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double l1 = 0.0;
        for (double v : ds.features.row(i)) l1 += v;
        if (l1 > 0.0)
            for (double& v : ds.features.row(i)) v /= l1;
    }
    std::uniform_int_distribution<std::uint32_t> any_node(0, static_cast<std::uint32_t>(n - 1));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = members[i % shape.classes];
        std::uniform_int_distribution<std::size_t> own_pick(0, own.size() - 1);
        for (std::size_t k = 0; k < shape.citations_per_node; ++k) {
            const std::uint32_t target = u01(rng) < shape.homophily ? own[own_pick(rng)] : any_node(rng);
            ds.citations.emplace_back(static_cast<std::uint32_t>(i), target);
        }
    }
    return ds;
}

} // namespace ihgnn::synthetic
