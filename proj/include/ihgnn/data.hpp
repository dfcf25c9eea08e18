#pragma once

#include "ihgnn/hypergraph.hpp"
#include "ihgnn/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ihgnn {

struct CitationDataset {
    std::vector<std::string> node_ids;    // row order of features/labels
    DenseMatrix features;                 // n x d
    std::vector<int> labels;              // index into class_names
    std::vector<std::string> class_names; // sorted
    std::vector<std::pair<std::uint32_t, std::uint32_t>> citations; // (citing, cited) row indices
    std::size_t dropped_citations = 0;    // endpoints missing from the content file

    std::size_t node_count() const noexcept { return node_ids.size(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }
    std::size_t class_count() const noexcept { return class_names.size(); }
};

struct LoadOptions {
    bool normalize_features = true; // rows scaled to unit l1 (all-zero rows stay zero)
};

// content: "<id> <f_1> ... <f_d> <label>" (tab or space separated)
// cites:   "<cited_id> <citing_id>"
CitationDataset read_citation_dataset(std::istream& content, std::istream& cites, const LoadOptions& opts = {});
CitationDataset load_citation_dataset(const std::filesystem::path& content_path, const std::filesystem::path& cites_path,
                                      const LoadOptions& opts = {});

// One weight-1 hyperedge per cited paper whose members are its citers.
// Self-citations are skipped; singleton hyperedges are kept.
Hypergraph citations_to_hypergraph(const CitationDataset& ds);

struct SplitSpec {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;

    // Throws ValidationError unless the sets are disjoint and inside [0, n).
    void validate(std::size_t n) const;
};

struct SplitStrategy {
    enum class Kind { standard, random_stratified };
    Kind kind = Kind::standard;
    // standard
    std::size_t per_class_train = 20;
    std::size_t val_count = 500;
    std::size_t test_count = 1000;
    // random_stratified
    double train_frac = 0.1;
    double val_frac = 0.1;

    static SplitStrategy standard() { return {}; }
    static SplitStrategy stratified(double train_frac, double val_frac);
};

// Deterministic for a given seed. Every class must have at least one node.
SplitSpec make_splits(std::span<const int> labels, std::size_t class_count, const SplitStrategy& strategy,
                      std::uint64_t seed);

// Lowercase hex digest.
std::string sha256_file(const std::filesystem::path& path);

} // namespace ihgnn
