// ihgnn: train, evaluate, verify and sweep implicit hypergraph networks.

#include "cli_support.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/synthetic.hpp"
#include "ihgnn/theory.hpp"
#include "ihgnn/verify.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

using namespace ihgnn;
using namespace ihgnn::cli;

namespace {

namespace fs = std::filesystem;

struct Common {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    DataArgs data;
    TrainArgs train;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write " + p.string());
    return f;
}

Json dataset_summary(const LoadedData& d) {
    return {{"nodes", d.dataset.node_count()},
            {"features", d.dataset.feature_dim()},
            {"classes", d.dataset.class_count()},
            {"citations", d.dataset.citations.size()},
            {"dropped_citations", d.dataset.dropped_citations},
            {"hyperedges", d.raw_hyperedges},
            {"self_loops_added", d.self_loops_added},
            {"train", d.splits.train.size()},
            {"val", d.splits.val.size()},
            {"test", d.splits.test.size()}};
}

int cmd_train(const Common& c) {
    PhaseTimer timer;
    TrainConfig cfg = c.train.resolve();
    cfg.seed = c.seed;
    const fs::path out(c.out_dir);
    fs::create_directories(out);

    timer.start("load");
    const auto data = load_data(c.data, c.seed);
    timer.stop();
    timer.start("operator");
    const auto op = build_operator(data.graph);
    timer.stop();
    timer.start("train");
    const auto result = train(op, data.dataset.features, data.dataset.labels, data.splits, cfg);
    timer.stop();

    timer.start("write");
    Json manifest = base_manifest("train", c.seed);
    manifest["config"] = config_json(cfg);
    manifest["data"] = data_json(c.data);
    manifest["inputs"] = data.inputs;
    manifest["dataset"] = dataset_summary(data);

    save_checkpoint(out / "checkpoint.txt", Checkpoint{result.params, cfg.activation});
    {
        auto f = open_out(out / "metrics.csv");
        write_metrics_csv(f, result.metrics);
    }
    const auto final_fwd = forward(data.dataset.features, op, result.params, cfg.activation, cfg.solver);
    {
        auto f = open_out(out / "residuals.csv");
        write_residual_csv(f, final_fwd.equilibrium.residuals);
    }
    for (const char* name : {"checkpoint.txt", "metrics.csv", "residuals.csv"}) add_artifact(manifest, out / name);
    Json summary = {{"best_epoch", result.best_epoch}};
    if (result.best_epoch > 0) {
        const auto& m = result.metrics[result.best_epoch - 1];
        summary["val_acc"] = m.val_accuracy;
        summary["test_acc"] = m.test_accuracy;
        summary["macro_f1"] = m.macro_f1;
        std::cout << "best epoch " << result.best_epoch << ": val_acc " << format_double(m.val_accuracy)
                  << " test_acc " << format_double(m.test_accuracy) << " macro_f1 " << format_double(m.macro_f1)
                  << '\n';
    } else {
        std::cout << "no epochs run; checkpoint holds the initialization\n";
    }
    summary["w_norm_inf"] = max_row_abs_sum(result.params.w);
    manifest["result"] = summary;
    timer.stop();
    manifest["timings_s"] = timer.json();
    write_json(out / "manifest.json", manifest);
    std::cout << "wrote " << out.string() << "/{checkpoint.txt,metrics.csv,residuals.csv,manifest.json}\n";
    return 0;
}

int cmd_eval(const Common& c, const std::string& checkpoint, const std::string& tol_text) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const auto data = load_data(c.data, c.seed);
    const auto op = build_operator(data.graph);
    SolverConfig solver;
    if (!tol_text.empty()) solver.tol = parse_double(tol_text);
    const auto fwd = forward(data.dataset.features, op, ck.params, ck.activation, solver);
    if (!fwd.equilibrium.converged) throw SolverError("eval: forward solve did not converge");
    const auto pred = predicted_classes(fwd.prediction);
    Json j = {{"checkpoint", checkpoint}, {"activation", ck.activation.name()},
              {"w_norm_inf", max_row_abs_sum(ck.params.w)}, {"forward_iters", fwd.equilibrium.iterations}};
    for (const auto& [name, mask] : {std::pair{"train", &data.splits.train}, std::pair{"val", &data.splits.val},
                                     std::pair{"test", &data.splits.test}}) {
        if (mask->empty()) continue;
        const auto r = evaluate_predictions(pred, data.dataset.labels, *mask);
        j[name] = {{"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}, {"count", mask->size()}};
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_verify(const Common& c, const std::vector<std::string>& checks, std::size_t order, bool with_data,
               const std::string& plot_dir) {
    verify::Options opts;
    opts.seed = c.seed;
    opts.expressivity_order = order;
    std::optional<LoadedData> data;
    if (with_data) {
        data = load_data(c.data, c.seed);
        opts.hypergraph = &data->graph;
    }
    const auto& names = checks.empty() ? verify::check_names() : checks;
    bool all = true;
    std::printf("%-14s %-6s %s\n", "check", "result", "detail");
    for (const auto& name : names) {
        const auto r = verify::run_check(name, opts);
        all = all && r.passed;
        std::printf("%-14s %-6s %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.detail.c_str());
    }
    if (!plot_dir.empty()) {
        const fs::path dir(plot_dir);
        fs::create_directories(dir);
        Rng rng = substream(c.seed, "plots");
        synthetic::HypergraphShape shape;
        shape.nodes = 60;
        const auto op = build_operator(synthetic::random_hypergraph(shape, rng));
        const DenseMatrix x = synthetic::random_matrix(60, 8, rng);
        for (double kappa : {0.5, 0.8, 0.95}) {
            SolverConfig cfg;
            cfg.tol = 1e-10;
            cfg.max_iters = 5000;
            const auto sol = solve_forward(op, synthetic::random_weight(8, kappa, rng), x, Activation::relu(), cfg);
            auto f = open_out(dir / ("residuals_kappa" + format_double(kappa) + ".csv"));
            write_residual_csv(f, sol.residuals);
        }
        ModelParams p;
        p.kappa = 0.9;
        p.w = 0.9 * DenseMatrix::identity(8);
        p.theta1 = DenseMatrix::identity(8);
        p.theta2 = DenseMatrix::identity(8);
        p.b.assign(8, 0.0);
        const std::vector<std::size_t> depths{1, 2, 4, 8, 16, 32, 64, 128};
        const auto rows = oversmoothing_profile(op, p, Activation::tanh(), x, depths);
        auto f = open_out(dir / "oversmoothing.csv");
        write_oversmoothing_csv(f, rows);
        std::cout << "wrote plot data to " << dir.string() << '\n';
    }
    return all ? 0 : 2;
}

struct SweepGrid {
    std::vector<std::size_t> hidden;
    std::vector<double> lr;
    std::vector<double> dropout;
    std::vector<std::uint64_t> seeds;
    std::size_t jobs = 1;
};

int cmd_sweep(const Common& c, SweepGrid grid) {
    if (grid.hidden.empty() || grid.lr.empty() || grid.dropout.empty())
        throw ValidationError("sweep: --nhid, --lr-grid and --dropout-grid each need at least one value");
    if (grid.seeds.empty()) grid.seeds.push_back(c.seed);
    const TrainConfig base = c.train.resolve();
    const fs::path out(c.out_dir);
    fs::create_directories(out);

    PhaseTimer timer;
    timer.start("load");
    const auto data = load_data(c.data, c.seed);
    const auto op = build_operator(data.graph);
    timer.stop();

    struct Cell {
        TrainConfig cfg;
        std::size_t best_epoch = 0;
        MetricsRecord best;
    };
    std::vector<Cell> cells;
    for (auto h : grid.hidden)
        for (double lr : grid.lr)
            for (double dr : grid.dropout)
                for (auto seed : grid.seeds) {
                    Cell cell;
                    cell.cfg = base;
                    cell.cfg.hidden_dim = h;
                    cell.cfg.learning_rate = lr;
                    cell.cfg.dropout = dr;
                    cell.cfg.seed = seed;
                    cell.cfg.validate();
                    cells.push_back(cell);
                }

    timer.start("train");
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
            try {
                const auto res = train(op, data.dataset.features, data.dataset.labels, data.splits, cells[k].cfg);
                cells[k].best_epoch = res.best_epoch;
                if (res.best_epoch > 0) cells[k].best = res.metrics[res.best_epoch - 1];
                std::lock_guard lock(m);
                log::info("sweep cell " + std::to_string(k + 1) + "/" + std::to_string(cells.size()) + " done");
            } catch (...) {
                std::lock_guard lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(grid.jobs, 1, cells.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    timer.stop();

    timer.start("write");
    {
        auto f = open_out(out / "sweep.csv");
        f << "nhid,lr,dropout,seed,best_epoch,val_acc,test_acc,macro_f1\n";
        for (const auto& cell : cells)
            f << cell.cfg.hidden_dim << ',' << format_double(cell.cfg.learning_rate) << ','
              << format_double(cell.cfg.dropout) << ',' << cell.cfg.seed << ',' << cell.best_epoch << ','
              << format_double(cell.best.val_accuracy) << ',' << format_double(cell.best.test_accuracy) << ','
              << format_double(cell.best.macro_f1) << '\n';
    }
    Json stability = Json::array();
    {
        auto f = open_out(out / "heatmap.csv");
        f << "nhid,lr,dropout,runs,mean_test_acc,std_test_acc,mean_macro_f1,std_macro_f1\n";
        const std::size_t per = grid.seeds.size();
        for (std::size_t k = 0; k < cells.size(); k += per) {
            std::vector<double> acc, f1;
            for (std::size_t s = 0; s < per; ++s) {
                acc.push_back(cells[k + s].best.test_accuracy);
                f1.push_back(cells[k + s].best.macro_f1);
            }
            MetricSummary sa{acc[0], 0.0, acc[0], acc[0]}, sf{f1[0], 0.0, f1[0], f1[0]};
            if (per >= 2) {
                sa = summarize(acc);
                sf = summarize(f1);
            }
            const auto& cfg = cells[k].cfg;
            f << cfg.hidden_dim << ',' << format_double(cfg.learning_rate) << ',' << format_double(cfg.dropout) << ','
              << per << ',' << format_double(sa.mean) << ',' << format_double(sa.stddev) << ','
              << format_double(sf.mean) << ',' << format_double(sf.stddev) << '\n';
            stability.push_back({{"nhid", cfg.hidden_dim},
                                 {"lr", cfg.learning_rate},
                                 {"dropout", cfg.dropout},
                                 {"test_acc", {{"mean", sa.mean}, {"std", sa.stddev}, {"ci95", {sa.ci_low, sa.ci_high}}}},
                                 {"macro_f1", {{"mean", sf.mean}, {"std", sf.stddev}, {"ci95", {sf.ci_low, sf.ci_high}}}}});
        }
    }
    write_json(out / "stability.json", stability);
    Json manifest = base_manifest("sweep", c.seed);
    manifest["config"] = config_json(base);
    manifest["grid"] = {{"nhid", grid.hidden}, {"lr", grid.lr}, {"dropout", grid.dropout}, {"seeds", grid.seeds}};
    manifest["data"] = data_json(c.data);
    manifest["inputs"] = data.inputs;
    manifest["dataset"] = dataset_summary(data);
    for (const char* name : {"sweep.csv", "heatmap.csv", "stability.json"}) add_artifact(manifest, out / name);
    timer.stop();
    manifest["timings_s"] = timer.json();
    write_json(out / "manifest.json", manifest);
    std::cout << cells.size() << " runs written to " << (out / "sweep.csv").string() << '\n';
    return 0;
}

int cmd_preprocess(const Common& c) {
    const fs::path out(c.out_dir);
    fs::create_directories(out);
    const auto data = load_data(c.data, c.seed);
    save_hypergraph(out / "hypergraph.txt", data.graph);
    const auto op = build_operator(data.graph);
    Json manifest = base_manifest("preprocess", c.seed);
    manifest["data"] = data_json(c.data);
    manifest["inputs"] = data.inputs;
    manifest["dataset"] = dataset_summary(data);
    manifest["rowsum_deviation"] = row_stochastic_check(op);
    add_artifact(manifest, out / "hypergraph.txt");
    write_json(out / "manifest.json", manifest);
    std::cout << manifest["dataset"].dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Implicit hypergraph neural networks: training, evaluation and verification"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "debug, info, warn, error or off")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    Common common;
    auto add_common = [&](CLI::App* sub, bool training) {
        sub->set_config("--config", "", "key = value file; flags given on the command line win");
        sub->add_option("--seed", common.seed, "Run seed")->capture_default_str();
        sub->add_option("--out", common.out_dir, "Output directory")->capture_default_str();
        common.data.attach(*sub);
        if (training) common.train.attach(*sub);
    };

    auto* train_cmd = app.add_subcommand("train", "Train on a citation dataset");
    add_common(train_cmd, true);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_common(eval_cmd, false);
    std::string checkpoint, eval_tol;
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--tol", eval_tol, "Fixed-point tolerance");

    auto* verify_cmd = app.add_subcommand("verify", "Run the theory checks on synthetic instances");
    add_common(verify_cmd, false);
    std::vector<std::string> checks;
    std::size_t order = 3;
    std::string plot_dir;
    verify_cmd->add_option("--check", checks, "Check name (repeatable); default all")
        ->check(CLI::IsMember(verify::check_names()));
    verify_cmd->add_option("--K", order, "Polynomial order for the expressivity check")->capture_default_str();
    verify_cmd->add_option("--plot-dir", plot_dir, "Also write residual and oversmoothing CSVs here");

    auto* sweep_cmd = app.add_subcommand("sweep", "Grid over hidden size, learning rate and dropout");
    add_common(sweep_cmd, true);
    SweepGrid grid;
    sweep_cmd->add_option("--nhid", grid.hidden, "Hidden sizes")->delimiter(',');
    sweep_cmd->add_option("--lr-grid", grid.lr, "Learning rates")->delimiter(',');
    sweep_cmd->add_option("--dropout-grid", grid.dropout, "Dropout rates")->delimiter(',');
    sweep_cmd->add_option("--seeds", grid.seeds, "Seeds per cell (default: --seed)")->delimiter(',');
    sweep_cmd->add_option("--jobs", grid.jobs, "Concurrent runs")->capture_default_str();

    auto* pre_cmd = app.add_subcommand("preprocess", "Build and cache the citation hypergraph");
    add_common(pre_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (log_level == "debug") log::set_level(log::Level::debug);
        else if (log_level == "warn") log::set_level(log::Level::warn);
        else if (log_level == "error") log::set_level(log::Level::error);
        else if (log_level == "off") log::set_level(log::Level::off);

        if (train_cmd->parsed()) return cmd_train(common);
        if (eval_cmd->parsed()) return cmd_eval(common, checkpoint, eval_tol);
        if (verify_cmd->parsed())
            return cmd_verify(common, checks, order, verify_cmd->count("--dataset") + verify_cmd->count("--content") > 0,
                              plot_dir);
        if (sweep_cmd->parsed()) return cmd_sweep(common, grid);
        if (pre_cmd->parsed()) return cmd_preprocess(common);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
