#include "ihgnn/data.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/rng.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

namespace ihgnn {

namespace {

std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ls(line);
    std::string t;
    while (ls >> t) out.push_back(std::move(t));
    return out;
}

} // namespace

CitationDataset read_citation_dataset(std::istream& content, std::istream& cites, const LoadOptions& opts) {
    CitationDataset ds;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::unordered_map<std::string, std::uint32_t> index;

    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    while (std::getline(content, line)) {
        ++line_no;
        auto tok = tokens(line);
        if (tok.empty()) continue;
        const std::string where = "content line " + std::to_string(line_no) + ": ";
        if (tok.size() < 3) throw ValidationError(where + "expected id, features and label");
        if (rows.empty()) dim = tok.size() - 2;
        else if (tok.size() - 2 != dim)
            throw ValidationError(where + "expected " + std::to_string(dim) + " features, got " +
                                  std::to_string(tok.size() - 2));
        if (!index.emplace(tok.front(), static_cast<std::uint32_t>(rows.size())).second)
            throw ValidationError(where + "duplicate node id '" + tok.front() + "'");
        std::vector<double> feat(dim);
        try {
            for (std::size_t j = 0; j < dim; ++j) feat[j] = parse_double(tok[j + 1]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
        ds.node_ids.push_back(tok.front());
        raw_labels.push_back(tok.back());
        rows.push_back(std::move(feat));
    }

    ds.class_names = raw_labels;
    std::sort(ds.class_names.begin(), ds.class_names.end());
    ds.class_names.erase(std::unique(ds.class_names.begin(), ds.class_names.end()), ds.class_names.end());
    for (const auto& l : raw_labels)
        ds.labels.push_back(static_cast<int>(
            std::lower_bound(ds.class_names.begin(), ds.class_names.end(), l) - ds.class_names.begin()));

    ds.features = DenseMatrix(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double l1 = 0.0;
        for (double v : rows[i]) l1 += std::abs(v);
        const double scale = (opts.normalize_features && l1 > 0.0) ? 1.0 / l1 : 1.0;
        auto out = ds.features.row(i);
        for (std::size_t j = 0; j < dim; ++j) out[j] = rows[i][j] * scale;
    }

    line_no = 0;
    while (std::getline(cites, line)) {
        ++line_no;
        auto tok = tokens(line);
        if (tok.empty()) continue;
        if (tok.size() != 2)
            throw ValidationError("cites line " + std::to_string(line_no) + ": expected '<cited> <citing>'");
        const auto cited = index.find(tok[0]);
        const auto citing = index.find(tok[1]);
        if (cited == index.end() || citing == index.end()) {
            ++ds.dropped_citations;
            continue;
        }
        ds.citations.emplace_back(citing->second, cited->second);
    }
    if (ds.dropped_citations > 0)
        log::warn("dropped " + std::to_string(ds.dropped_citations) + " citations with unknown endpoints");
    return ds;
}

CitationDataset load_citation_dataset(const std::filesystem::path& content_path, const std::filesystem::path& cites_path,
                                      const LoadOptions& opts) {
    std::ifstream content(content_path);
    if (!content) throw ValidationError("cannot open " + content_path.string());
    std::ifstream cites(cites_path);
    if (!cites) throw ValidationError("cannot open " + cites_path.string());
    return read_citation_dataset(content, cites, opts);
}

Hypergraph citations_to_hypergraph(const CitationDataset& ds) {
    // std::map keeps hyperedges ordered by target, independent of file order.
    std::map<std::uint32_t, std::vector<Hypergraph::Node>> citers;
    std::size_t self = 0;
    for (auto [citing, cited] : ds.citations) {
        if (citing == cited) {
            ++self;
            continue;
        }
        citers[cited].push_back(citing);
    }
    if (self > 0) log::info("ignored " + std::to_string(self) + " self-citations");
    std::vector<std::vector<Hypergraph::Node>> edges;
    edges.reserve(citers.size());
    for (auto& [target, members] : citers) edges.push_back(std::move(members));
    std::vector<double> weights(edges.size(), 1.0);
    Hypergraph g(ds.node_count(), std::move(edges), std::move(weights));
    log::info("built " + std::to_string(g.edge_count()) + " hyperedges from " + std::to_string(ds.citations.size()) +
              " citations");
    return g;
}

void SplitSpec::validate(std::size_t n) const {
    std::vector<char> seen(n, 0);
    for (const auto* set : {&train, &val, &test})
        for (std::size_t i : *set) {
            if (i >= n) throw ValidationError("split index " + std::to_string(i) + " outside [0, " + std::to_string(n) + ")");
            if (seen[i]) throw ValidationError("node " + std::to_string(i) + " appears in more than one split");
            seen[i] = 1;
        }
}

SplitStrategy SplitStrategy::stratified(double train_frac, double val_frac) {
    if (!(train_frac > 0.0 && val_frac >= 0.0 && train_frac + val_frac <= 1.0))
        throw ValidationError("stratified split fractions must satisfy 0 < train, 0 <= val, train + val <= 1");
    SplitStrategy s;
    s.kind = Kind::random_stratified;
    s.train_frac = train_frac;
    s.val_frac = val_frac;
    return s;
}

SplitSpec make_splits(std::span<const int> labels, std::size_t class_count, const SplitStrategy& strategy,
                      std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count)
            throw ValidationError("make_splits: node " + std::to_string(i) + " has label outside [0, " +
                                  std::to_string(class_count) + ")");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < class_count; ++c)
        if (by_class[c].empty()) throw ValidationError("make_splits: class " + std::to_string(c) + " has no nodes");

    Rng rng = substream(seed, "splits");
    for (auto& members : by_class) std::shuffle(members.begin(), members.end(), rng);

    SplitSpec s;
    if (strategy.kind == SplitStrategy::Kind::standard) {
        std::vector<std::size_t> rest;
        for (const auto& members : by_class) {
            const std::size_t k = std::min(strategy.per_class_train, members.size());
            s.train.insert(s.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
            rest.insert(rest.end(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end());
        }
        std::shuffle(rest.begin(), rest.end(), rng);
        const std::size_t nv = std::min(strategy.val_count, rest.size());
        const std::size_t nt = std::min(strategy.test_count, rest.size() - nv);
        s.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(nv));
        s.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(nv),
                      rest.begin() + static_cast<std::ptrdiff_t>(nv + nt));
    } else {
        for (const auto& members : by_class) {
            const auto m = static_cast<double>(members.size());
            const auto nt = static_cast<std::size_t>(std::llround(strategy.train_frac * m));
            const auto nv = std::min(static_cast<std::size_t>(std::llround(strategy.val_frac * m)), members.size() - nt);
            auto it = members.begin();
            s.train.insert(s.train.end(), it, it + static_cast<std::ptrdiff_t>(nt));
            it += static_cast<std::ptrdiff_t>(nt);
            s.val.insert(s.val.end(), it, it + static_cast<std::ptrdiff_t>(nv));
            it += static_cast<std::ptrdiff_t>(nv);
            s.test.insert(s.test.end(), it, members.end());
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 0xf];
    }
    return out;
}

} // namespace ihgnn
