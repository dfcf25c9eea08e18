#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ihgnn/data.hpp"
#include "ihgnn/linalg.hpp"
#include "ihgnn/model.hpp"
#include "ihgnn/train.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace ihgnn;

namespace {

const std::string kData = " --dataset synthetic --synthetic-nodes 240 --split stratified";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("ihgnn_cli_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + IHGNN_CLI_PATH + "\" --log-level error " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_CASE("exit codes") {
    CHECK(run("") == 1);
    CHECK(run("train --no-such-flag") == 1);
    CHECK(run("train --dataset mnist") == 1);
    const auto out = scratch("bad");
    CHECK(run("train" + kData + " --kappa 1.5 --out " + out.string()) == 1);
    CHECK(run("train --dataset cora --data-dir /nonexistent --out " + out.string()) == 1);
    CHECK(run("train" + kData + " --epochs 2 --max-iters 1 --out " + out.string()) == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("train writes byte-identical artifacts across runs and a hashed manifest") {
    const auto a = scratch("a"), b = scratch("b");
    REQUIRE(run("train" + kData + " --epochs 6 --hidden 8 --seed 3 --out " + a.string()) == 0);
    REQUIRE(run("train" + kData + " --epochs 6 --hidden 8 --seed 3 --out " + b.string()) == 0);
    for (const char* f : {"checkpoint.txt", "metrics.csv", "residuals.csv"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(lines(a / "metrics.csv") == 7);
    CHECK(slurp(a / "residuals.csv").rfind("iteration,residual\n", 0) == 0);

    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m["command"] == "train");
    CHECK(m["seed"] == 3);
    REQUIRE(m["artifacts"].size() == 3);
    for (const auto& art : m["artifacts"]) {
        const std::string name = art["path"];
        INFO(name);
        CHECK(art["sha256"] == sha256_file(a / name));
    }
    CHECK(m["config"]["epochs"] == 6);

    const auto ckpt = load_checkpoint(a / "checkpoint.txt");
    CHECK(ckpt.params.hidden_dim() == 8);
    CHECK(run("eval" + kData + " --seed 3 --checkpoint " + (a / "checkpoint.txt").string() + " --out " +
              (a / "eval").string()) == 0);
}

TEST_CASE("zero epochs checkpoints the initialization; kappa bounds the saved W") {
    const auto out = scratch("zero");
    REQUIRE(run("train" + kData + " --epochs 0 --hidden 8 --seed 5 --out " + out.string()) == 0);
    TrainConfig cfg;
    cfg.hidden_dim = 8;
    cfg.seed = 5;
    const auto ckpt = load_checkpoint(out / "checkpoint.txt");
    CHECK(ckpt.params == initialize_params(ckpt.params.input_dim(), ckpt.params.output_dim(), cfg));
    CHECK(lines(out / "metrics.csv") == 1);

    const auto k = scratch("kappa");
    REQUIRE(run("train" + kData + " --epochs 5 --hidden 8 --kappa 0.9 --lr 0.5 --out " + k.string()) == 0);
    CHECK(max_row_abs_sum(load_checkpoint(k / "checkpoint.txt").params.w) <= 0.9 + 1e-12);
}

TEST_CASE("sweep covers the grid and a one-cell sweep reproduces train") {
    const auto out = scratch("sweep");
    REQUIRE(run("sweep" + kData + " --epochs 3 --nhid 4,8 --lr-grid 0.01,0.05 --dropout-grid 0.5 --seeds 1,2 --jobs 3 --out " +
                out.string()) == 0);
    CHECK(lines(out / "sweep.csv") == 9);
    CHECK(lines(out / "heatmap.csv") == 5);
    const auto stab = nlohmann::json::parse(slurp(out / "stability.json"));
    CHECK(stab.size() == 4);

    const auto one = scratch("one"), tr = scratch("one_train");
    REQUIRE(run("sweep" + kData + " --epochs 4 --nhid 8 --lr-grid 0.01 --dropout-grid 0.5 --seeds 2 --seed 2 --out " +
                one.string()) == 0);
    REQUIRE(run("train" + kData + " --epochs 4 --hidden 8 --lr 0.01 --dropout 0.5 --seed 2 --out " + tr.string()) == 0);
    std::istringstream sweep(slurp(one / "sweep.csv"));
    std::string header, row;
    std::getline(sweep, header);
    std::getline(sweep, row);
    const auto m = nlohmann::json::parse(slurp(tr / "manifest.json"));
    const std::size_t best = m["result"]["best_epoch"];
    REQUIRE(best >= 1);
    CHECK(row.find(",2," + std::to_string(best) + ",") != std::string::npos);
    std::istringstream metrics(slurp(tr / "metrics.csv"));
    std::string mrow;
    for (std::size_t i = 0; i <= best; ++i) std::getline(metrics, mrow);
    // val_acc and test_acc columns agree with the train run's best epoch
    std::vector<std::string> mcols, scols;
    std::istringstream ms(mrow), ss(row);
    for (std::string c; std::getline(ms, c, ',');) mcols.push_back(c);
    for (std::string c; std::getline(ss, c, ',');) scols.push_back(c);
    REQUIRE(mcols.size() == 8);
    REQUIRE(scols.size() == 8);
    CHECK(scols[5] == mcols[2]);
    CHECK(scols[6] == mcols[3]);
    CHECK(scols[7] == mcols[4]);
}

TEST_CASE("verify subcommand") {
    const auto out = scratch("verify");
    CHECK(run("verify --check expressivity --K 3 --out " + out.string()) == 0);
    CHECK(run("verify --check nope") == 1);
    const auto plots = scratch("plots");
    CHECK(run("verify --check rowsum --out " + out.string() + " --plot-dir " + plots.string()) == 0);
    CHECK(fs::exists(plots));
}

TEST_CASE("preprocess caches a loadable hypergraph") {
    const auto out = scratch("pre");
    REQUIRE(run("preprocess" + kData + " --out " + out.string()) == 0);
    const auto g = load_hypergraph(out / "hypergraph.txt");
    CHECK(g.node_count() == 240);
    CHECK(validate_admissible(g).admissible());
}
