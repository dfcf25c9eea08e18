#pragma once

#include "ihgnn/data.hpp"
#include "ihgnn/equilibrium.hpp"
#include "ihgnn/hypergraph.hpp"
#include "ihgnn/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ihgnn {

enum class OptimizerKind { sgd, adam };

OptimizerKind parse_optimizer(std::string_view text);
std::string to_string(OptimizerKind kind);

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 300;
    double kappa = 0.9;
    std::size_t hidden_dim = 128;
    double dropout = 0.5;
    OptimizerKind optimizer = OptimizerKind::adam;
    double weight_decay = 5e-4; // L2 on every parameter group
    std::uint64_t seed = 0;
    Activation activation = Activation::relu();
    SolverConfig solver{};
    bool warm_start = true; // reuse the previous epoch's Z* / U as solver init

    void validate() const;
};

struct MetricsRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double macro_f1 = 0.0; // on the test mask
    std::size_t forward_iters = 0;
    std::size_t adjoint_iters = 0;
    double lambda_abs_w = 0.0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct TrainResult {
    ModelParams params;       // best validation accuracy, earliest epoch on ties
    ModelParams initial;
    std::size_t best_epoch = 0; // 0 when no epoch ran
    std::vector<MetricsRecord> metrics;
};

// Glorot-uniform Theta1/Theta2, uniform W projected onto the kappa ball, b = 0.
ModelParams initialize_params(std::size_t input_dim, std::size_t output_dim, const TrainConfig& cfg);

// Labels outside the splits may be negative (unknown). Throws ValidationError
// for inadmissible hypergraphs and SolverError (with the epoch) when a solve
// fails to converge.
TrainResult train(const Hypergraph& g, const DenseMatrix& x, std::span<const int> labels, const SplitSpec& splits,
                  const TrainConfig& cfg);
TrainResult train(const PropagationOperator& op, const DenseMatrix& x, std::span<const int> labels,
                  const SplitSpec& splits, const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

std::vector<int> predicted_classes(const Prediction& pred);

// Macro F1 averages per-class F1 over classes that occur among the masked
// labels or predictions.
EvalResult evaluate_predictions(std::span<const int> predicted, std::span<const int> labels,
                                std::span<const std::size_t> mask);
EvalResult evaluate(const ModelParams& params, const PropagationOperator& op, const DenseMatrix& x,
                    std::span<const int> labels, std::span<const std::size_t> mask, const Activation& act,
                    const SolverConfig& solver = {});

// epoch,train_loss,val_acc,test_acc,macro_f1,forward_iters,adjoint_iters,lambda_abs_w
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0; // sample (n - 1)
    double ci_low = 0.0; // mean -/+ 1.96 stddev / sqrt(n)
    double ci_high = 0.0;
};

// Needs at least two values.
MetricSummary summarize(std::span<const double> values);

struct RunOutcome {
    std::uint64_t seed = 0;
    std::size_t best_epoch = 0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    double macro_f1 = 0.0;
};

struct StabilityReport {
    std::vector<RunOutcome> runs; // in seed order
    MetricSummary test_accuracy;
    MetricSummary macro_f1;
    MetricSummary val_accuracy;
};

// One training run per seed (cfg.seed is replaced); up to `jobs` runs at once.
StabilityReport repeat_runs(const PropagationOperator& op, const DenseMatrix& x, std::span<const int> labels,
                            const SplitSpec& splits, const TrainConfig& cfg, std::span<const std::uint64_t> seeds,
                            std::size_t jobs = 1);

std::string to_json(const StabilityReport& report);

} // namespace ihgnn
