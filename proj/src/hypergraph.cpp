#include "ihgnn/hypergraph.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ihgnn {

Hypergraph::Hypergraph(std::size_t node_count, std::vector<std::vector<Node>> edges, std::vector<double> weights)
    : node_count_(node_count) {
    if (edges.size() != weights.size())
        throw ValidationError("Hypergraph: " + std::to_string(edges.size()) + " hyperedges but " +
                              std::to_string(weights.size()) + " weights");
    std::map<std::vector<Node>, std::size_t> seen;
    for (std::size_t j = 0; j < edges.size(); ++j) {
        auto& e = edges[j];
        if (e.empty()) throw ValidationError("Hypergraph: hyperedge " + std::to_string(j) + " is empty");
        if (!std::isfinite(weights[j]))
            throw ValidationError("Hypergraph: hyperedge " + std::to_string(j) + " has a non-finite weight");
        for (Node v : e)
            if (v >= node_count)
                throw ValidationError("Hypergraph: hyperedge " + std::to_string(j) + " references node " +
                                      std::to_string(v) + " outside [0, " + std::to_string(node_count) + ")");
        std::sort(e.begin(), e.end());
        const auto last = std::unique(e.begin(), e.end());
        normalization_.collapsed_members += static_cast<std::size_t>(e.end() - last);
        e.erase(last, e.end());

        auto [it, inserted] = seen.emplace(e, edges_.size());
        if (inserted) {
            edges_.push_back(std::move(e));
            weights_.push_back(weights[j]);
        } else {
            weights_[it->second] += weights[j];
            ++normalization_.merged_edges;
        }
    }
    if (normalization_.collapsed_members > 0)
        log::warn("hypergraph: collapsed " + std::to_string(normalization_.collapsed_members) +
                  " duplicate node entries inside hyperedges");
    if (normalization_.merged_edges > 0)
        log::debug("hypergraph: merged " + std::to_string(normalization_.merged_edges) +
                   " structurally identical hyperedges");
}

std::vector<double> Hypergraph::node_degrees() const {
    std::vector<double> deg(node_count_, 0.0);
    for (std::size_t j = 0; j < edges_.size(); ++j)
        for (Node v : edges_[j]) deg[v] += weights_[j];
    return deg;
}

std::string AdmissibilityReport::first_violation() const {
    if (!negative_weight_edges.empty())
        return "hyperedge " + std::to_string(negative_weight_edges.front()) + " has a negative weight";
    if (!zero_degree_nodes.empty())
        return "node " + std::to_string(zero_degree_nodes.front()) + " has zero degree (" +
               std::to_string(zero_degree_nodes.size()) + " isolated nodes in total)";
    return {};
}

AdmissibilityReport validate_admissible(const Hypergraph& g) {
    AdmissibilityReport report;
    for (std::size_t j = 0; j < g.edge_count(); ++j)
        if (g.weight(j) < 0.0) report.negative_weight_edges.push_back(j);
    const auto deg = g.node_degrees();
    for (std::size_t i = 0; i < deg.size(); ++i)
        if (!(deg[i] > 0.0)) report.zero_degree_nodes.push_back(i);
    return report;
}

Hypergraph with_self_loops(const Hypergraph& g, std::size_t* added) {
    auto edges = g.edges();
    auto weights = g.weights();
    const auto deg = g.node_degrees();
    std::size_t count = 0;
    for (std::size_t i = 0; i < deg.size(); ++i) {
        if (deg[i] == 0.0) {
            edges.push_back({static_cast<Hypergraph::Node>(i)});
            weights.push_back(1.0);
            ++count;
        }
    }
    if (added) *added = count;
    return Hypergraph(g.node_count(), std::move(edges), std::move(weights));
}

PropagationOperator build_operator(const Hypergraph& g) {
    const auto report = validate_admissible(g);
    if (!report.admissible()) throw ValidationError("inadmissible hypergraph: " + report.first_violation());

    const std::size_t n = g.node_count();
    PropagationOperator op;
    op.node_degrees = g.node_degrees();
    op.edge_sizes.resize(g.edge_count());
    for (std::size_t j = 0; j < g.edge_count(); ++j) op.edge_sizes[j] = g.edge(j).size();

    std::vector<std::vector<std::uint32_t>> incident(n);
    for (std::size_t j = 0; j < g.edge_count(); ++j)
        for (auto v : g.edge(j)) incident[v].push_back(static_cast<std::uint32_t>(j));

    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(op.node_degrees[i]);

    std::vector<std::size_t> offsets{0};
    std::vector<SparseMatrix::Index> cols;
    std::vector<double> vals;
    std::vector<double> acc(n, 0.0);
    std::vector<char> touched_flag(n, 0);
    std::vector<SparseMatrix::Index> touched;
    for (std::size_t i = 0; i < n; ++i) {
        // Edges are visited in increasing index for every row, so M_ik and M_ki
        // accumulate identical terms in identical order: M is exactly symmetric.
        for (auto j : incident[i]) {
            const double w = g.weight(j);
            if (w == 0.0) continue;
            const double share = w / static_cast<double>(op.edge_sizes[j]);
            for (auto k : g.edge(j)) {
                if (!touched_flag[k]) {
                    touched_flag[k] = 1;
                    touched.push_back(k);
                }
                acc[k] += share;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (auto k : touched) {
            cols.push_back(k);
            vals.push_back(acc[k] * (inv_sqrt[i] * inv_sqrt[k]));
            acc[k] = 0.0;
            touched_flag[k] = 0;
        }
        touched.clear();
        offsets.push_back(cols.size());
    }
    op.m = SparseMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals));
    return op;
}

double row_stochastic_check(const PropagationOperator& op) {
    double worst = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) {
        const auto cols = op.m.row_cols(i);
        const auto vals = op.m.row_values(i);
        long double s = 0.0L;
        for (std::size_t p = 0; p < cols.size(); ++p)
            s += static_cast<long double>(vals[p]) * std::sqrt(static_cast<long double>(op.node_degrees[cols[p]]));
        s /= std::sqrt(static_cast<long double>(op.node_degrees[i]));
        worst = std::max(worst, static_cast<double>(std::abs(s - 1.0L)));
    }
    return worst;
}

void write_hypergraph(std::ostream& out, const Hypergraph& g) {
    out << "# nodes " << g.node_count() << '\n';
    for (std::size_t j = 0; j < g.edge_count(); ++j) {
        out << format_double(g.weight(j));
        for (auto v : g.edge(j)) out << ' ' << v;
        out << '\n';
    }
}

Hypergraph read_hypergraph(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    long long declared_nodes = -1;
    std::size_t max_node_plus_one = 0;
    std::vector<std::vector<Hypergraph::Node>> edges;
    std::vector<double> weights;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        try {
            if (tok[0] == '#') {
                std::string key, value;
                if ((ls >> key >> value) && key == "nodes") declared_nodes = parse_int(value);
                continue;
            }
            const double w = parse_double(tok);
            std::vector<Hypergraph::Node> members;
            while (ls >> tok) {
                const long long v = parse_int(tok);
                if (v < 0) throw ValidationError("negative node id");
                members.push_back(static_cast<Hypergraph::Node>(v));
                max_node_plus_one = std::max<std::size_t>(max_node_plus_one, static_cast<std::size_t>(v) + 1);
            }
            if (members.empty()) throw ValidationError("hyperedge without members");
            edges.push_back(std::move(members));
            weights.push_back(w);
        } catch (const ValidationError& e) {
            throw ValidationError("hypergraph line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    const std::size_t n = declared_nodes >= 0 ? static_cast<std::size_t>(declared_nodes) : max_node_plus_one;
    return Hypergraph(n, std::move(edges), std::move(weights));
}

void save_hypergraph(const std::filesystem::path& path, const Hypergraph& g) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_hypergraph(out, g);
}

Hypergraph load_hypergraph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_hypergraph(in);
}

} // namespace ihgnn
