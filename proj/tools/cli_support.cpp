#include "cli_support.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/synthetic.hpp"

#include <cstdlib>
#include <fstream>

#ifndef IHGNN_VERSION
#define IHGNN_VERSION "unknown"
#endif

namespace ihgnn::cli {

void DataArgs::attach(CLI::App& app) {
    if (const char* env = std::getenv("IHGNN_DATA_DIR")) data_dir = env;
    else data_dir = "data";
    app.add_option("--dataset", dataset, "cora, citeseer, pubmed or synthetic")
        ->check(CLI::IsMember({"cora", "citeseer", "pubmed", "synthetic"}))
        ->capture_default_str();
    app.add_option("--data-dir", data_dir, "Directory with <name>/<name>.content and .cites")->capture_default_str();
    app.add_option("--content", content, "Explicit content file (overrides --dataset)");
    app.add_option("--cites", cites, "Explicit cites file (overrides --dataset)");
    app.add_flag("--add-self-loops,!--no-add-self-loops", add_self_loops,
                 "Give isolated nodes a weight-1 singleton hyperedge")
        ->capture_default_str();
    app.add_flag("--normalize-features,!--no-normalize-features", normalize_features, "Scale feature rows to unit l1")
        ->capture_default_str();
    app.add_option("--split", split, "standard or stratified")
        ->check(CLI::IsMember({"standard", "stratified"}))
        ->capture_default_str();
    app.add_option("--train-frac", train_frac, "Stratified split train fraction")->capture_default_str();
    app.add_option("--val-frac", val_frac, "Stratified split validation fraction")->capture_default_str();
    app.add_option("--split-seed", split_seed, "Seed for splits (default: --seed)");
    app.add_option("--synthetic-nodes", synthetic_nodes, "Node count of the synthetic corpus")->capture_default_str();
}

LoadedData load_data(const DataArgs& args, std::uint64_t seed) {
    LoadedData out;
    const std::uint64_t split_seed = args.split_seed >= 0 ? static_cast<std::uint64_t>(args.split_seed) : seed;
    if (args.content.empty() != args.cites.empty())
        throw ValidationError("--content and --cites must be given together");
    if (!args.content.empty() || args.dataset != "synthetic") {
        std::filesystem::path content = args.content, cites = args.cites;
        if (content.empty()) {
            const auto dir = std::filesystem::path(args.data_dir) / args.dataset;
            content = dir / (args.dataset + ".content");
            cites = dir / (args.dataset + ".cites");
        }
        if (!std::filesystem::exists(content) || !std::filesystem::exists(cites))
            throw ValidationError("dataset files not found: " + content.string() + " / " + cites.string());
        out.dataset = load_citation_dataset(content, cites, {args.normalize_features});
        out.inputs["content"] = {{"path", content.string()}, {"sha256", sha256_file(content)}};
        out.inputs["cites"] = {{"path", cites.string()}, {"sha256", sha256_file(cites)}};
    } else {
        synthetic::CitationShape shape;
        shape.nodes = args.synthetic_nodes;
        out.dataset = synthetic::citation_corpus(shape, split_seed);
        out.inputs["synthetic"] = {{"nodes", shape.nodes}, {"classes", shape.classes}, {"seed", split_seed}};
    }
    out.graph = citations_to_hypergraph(out.dataset);
    out.raw_hyperedges = out.graph.edge_count();
    if (args.add_self_loops) {
        out.graph = with_self_loops(out.graph, &out.self_loops_added);
        if (out.self_loops_added > 0)
            log::info("added " + std::to_string(out.self_loops_added) + " singleton hyperedges for isolated nodes");
    }
    const SplitStrategy strategy =
        args.split == "standard" ? SplitStrategy::standard() : SplitStrategy::stratified(args.train_frac, args.val_frac);
    out.splits = make_splits(out.dataset.labels, out.dataset.class_count(), strategy, split_seed);
    return out;
}

void TrainArgs::attach(CLI::App& app) {
    app.add_option("--epochs", cfg.epochs)->capture_default_str();
    app.add_option("--lr", cfg.learning_rate, "Learning rate")->capture_default_str();
    app.add_option("--kappa", cfg.kappa, "Bound on ||W||_inf")->capture_default_str();
    app.add_option("--hidden", cfg.hidden_dim, "Hidden dimension d_h")->capture_default_str();
    app.add_option("--dropout", cfg.dropout, "Input dropout rate")->capture_default_str();
    app.add_option("--weight-decay", cfg.weight_decay)->capture_default_str();
    app.add_option("--optimizer", optimizer, "sgd or adam")->capture_default_str();
    app.add_option("--activation", activation, "relu, tanh, identity, leaky_relu[:slope]")->capture_default_str();
    app.add_option("--tol", cfg.solver.tol, "Fixed-point tolerance")->capture_default_str();
    app.add_option("--max-iters", cfg.solver.max_iters, "Fixed-point iteration cap")->capture_default_str();
    app.add_option("--contraction-check", contraction, "strict, warn or skip")->capture_default_str();
    app.add_flag("--warm-start,!--no-warm-start", warm_start, "Start each solve from the previous epoch's state")
        ->capture_default_str();
}

TrainConfig TrainArgs::resolve() const {
    TrainConfig c = cfg;
    c.activation = Activation::parse(activation);
    c.optimizer = parse_optimizer(optimizer);
    c.solver.check = parse_contraction(contraction);
    c.warm_start = warm_start;
    c.validate();
    return c;
}

ContractionCheck parse_contraction(const std::string& text) {
    if (text == "strict") return ContractionCheck::strict;
    if (text == "warn") return ContractionCheck::warn;
    if (text == "skip") return ContractionCheck::skip;
    throw ValidationError("unknown contraction check '" + text + "'");
}

std::string to_string(ContractionCheck c) {
    switch (c) {
    case ContractionCheck::strict: return "strict";
    case ContractionCheck::warn: return "warn";
    case ContractionCheck::skip: return "skip";
    }
    return "warn";
}

Json config_json(const TrainConfig& cfg) {
    return {{"epochs", cfg.epochs},
            {"lr", cfg.learning_rate},
            {"kappa", cfg.kappa},
            {"hidden", cfg.hidden_dim},
            {"dropout", cfg.dropout},
            {"weight_decay", cfg.weight_decay},
            {"optimizer", to_string(cfg.optimizer)},
            {"activation", cfg.activation.name()},
            {"tol", cfg.solver.tol},
            {"max_iters", cfg.solver.max_iters},
            {"contraction_check", to_string(cfg.solver.check)},
            {"warm_start", cfg.warm_start},
            {"seed", cfg.seed}};
}

Json data_json(const DataArgs& a) {
    return {{"dataset", a.dataset},          {"data_dir", a.data_dir},
            {"content", a.content},          {"cites", a.cites},
            {"add_self_loops", a.add_self_loops}, {"normalize_features", a.normalize_features},
            {"split", a.split},              {"train_frac", a.train_frac},
            {"val_frac", a.val_frac},        {"split_seed", a.split_seed},
            {"synthetic_nodes", a.synthetic_nodes}};
}

void PhaseTimer::start(std::string name) {
    current_ = std::move(name);
    began_ = std::chrono::steady_clock::now();
}

void PhaseTimer::stop() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - began_;
    phases_.emplace_back(current_, dt.count());
}

Json PhaseTimer::json() const {
    Json j = Json::object();
    for (const auto& [name, secs] : phases_) j[name] = secs;
    return j;
}

Json base_manifest(const std::string& command, std::uint64_t seed) {
    return {{"tool", "ihgnn"}, {"version", IHGNN_VERSION}, {"command", command}, {"seed", seed},
            {"artifacts", Json::array()}};
}

void add_artifact(Json& manifest, const std::filesystem::path& path) {
    manifest["artifacts"].push_back({{"path", path.filename().string()}, {"sha256", sha256_file(path)}});
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace ihgnn::cli
