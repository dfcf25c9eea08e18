#pragma once

#include "ihgnn/data.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/train.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ihgnn::cli {

using Json = nlohmann::ordered_json;

struct DataArgs {
    std::string dataset = "cora"; // cora | citeseer | pubmed | synthetic
    std::string data_dir;
    std::string content;
    std::string cites;
    bool add_self_loops = true;
    bool normalize_features = true;
    std::string split = "standard"; // standard | stratified
    double train_frac = 0.1;
    double val_frac = 0.1;
    long long split_seed = -1; // -1: follow --seed
    std::size_t synthetic_nodes = 1500;

    void attach(CLI::App& app);
};

struct LoadedData {
    CitationDataset dataset;
    Hypergraph graph;
    SplitSpec splits;
    std::size_t self_loops_added = 0;
    std::size_t raw_hyperedges = 0;
    Json inputs = Json::object(); // path + sha256 per input file
};

LoadedData load_data(const DataArgs& args, std::uint64_t seed);

struct TrainArgs {
    TrainConfig cfg;
    std::string activation = "relu";
    std::string optimizer = "adam";
    std::string contraction = "warn";
    bool warm_start = true;

    void attach(CLI::App& app);
    // Copies the string-valued choices into cfg and validates it.
    TrainConfig resolve() const;
};

Json config_json(const TrainConfig& cfg);
Json data_json(const DataArgs& args);

class PhaseTimer {
public:
    void start(std::string name);
    void stop();
    Json json() const;

private:
    std::string current_;
    std::chrono::steady_clock::time_point began_;
    std::vector<std::pair<std::string, double>> phases_;
};

// version, command, and artifact hashes filled in here.
Json base_manifest(const std::string& command, std::uint64_t seed);
void add_artifact(Json& manifest, const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

ContractionCheck parse_contraction(const std::string& text);
std::string to_string(ContractionCheck c);

} // namespace ihgnn::cli
