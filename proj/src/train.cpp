#include "ihgnn/train.hpp"

#include "ihgnn/autograd.hpp"
#include "ihgnn/error.hpp"
#include "ihgnn/log.hpp"
#include "ihgnn/numfmt.hpp"
#include "ihgnn/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

namespace ihgnn {

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "sgd") return OptimizerKind::sgd;
    if (text == "adam") return OptimizerKind::adam;
    throw ValidationError("unknown optimizer '" + std::string(text) + "' (expected sgd or adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning rate must be positive");
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in [0, 1)");
    if (hidden_dim == 0) throw ValidationError("hidden dimension must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ValidationError("weight decay must be nonnegative");
}

namespace {

void fill_uniform(DenseMatrix& m, double limit, Rng& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : m.values()) v = dist(rng);
}

// Flat views over the four parameter groups, in a fixed order.
std::vector<std::span<double>> groups(ModelParams& p) {
    return {p.w.values(), p.theta1.values(), p.theta2.values(), std::span<double>(p.b)};
}
std::vector<std::span<const double>> groups(const GradientBundle& g) {
    return {g.grad_w.values(), g.grad_theta1.values(), g.grad_theta2.values(), std::span<const double>(g.grad_b)};
}

class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, ModelParams& p) : cfg_(cfg) {
        for (auto s : groups(p)) {
            m_.emplace_back(s.size(), 0.0);
            v_.emplace_back(s.size(), 0.0);
        }
    }

    void step(ModelParams& p, const GradientBundle& g) {
        ++t_;
        auto ps = groups(p);
        auto gs = groups(g);
        const double lr = cfg_.learning_rate;
        const double wd = cfg_.weight_decay;
        if (cfg_.optimizer == OptimizerKind::sgd) {
            for (std::size_t k = 0; k < ps.size(); ++k)
                for (std::size_t j = 0; j < ps[k].size(); ++j) ps[k][j] -= lr * (gs[k][j] + wd * ps[k][j]);
            return;
        }
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        for (std::size_t k = 0; k < ps.size(); ++k) {
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t j = 0; j < ps[k].size(); ++j) {
                const double grad = gs[k][j] + wd * ps[k][j];
                m[j] = b1 * m[j] + (1.0 - b1) * grad;
                v[j] = b2 * v[j] + (1.0 - b2) * grad * grad;
                ps[k][j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
            }
        }
    }

private:
    const TrainConfig& cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

DenseMatrix apply_dropout(const DenseMatrix& x, double rate, Rng& rng) {
    if (rate == 0.0) return x;
    DenseMatrix out = x;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep = 1.0 / (1.0 - rate);
    for (double& v : out.values()) v = u(rng) < rate ? 0.0 : v * keep;
    return out;
}

void check_labels(std::span<const int> labels, const SplitSpec& splits, std::size_t n, std::size_t& classes) {
    if (labels.size() != n) throw ValidationError("label count does not match node count");
    splits.validate(n);
    if (splits.train.empty()) throw ValidationError("training split is empty");
    int mx = -1;
    for (const auto* set : {&splits.train, &splits.val, &splits.test})
        for (std::size_t i : *set) {
            if (labels[i] < 0) throw ValidationError("node " + std::to_string(i) + " is in a split but unlabeled");
            mx = std::max(mx, labels[i]);
        }
    classes = static_cast<std::size_t>(mx) + 1;
}

} // namespace

ModelParams initialize_params(std::size_t input_dim, std::size_t output_dim, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t dh = cfg.hidden_dim;
    Rng rng = substream(cfg.seed, "init");
    ModelParams p;
    p.kappa = cfg.kappa;
    p.theta1 = DenseMatrix(input_dim, dh);
    fill_uniform(p.theta1, std::sqrt(6.0 / static_cast<double>(input_dim + dh)), rng);
    p.w = DenseMatrix(dh, dh);
    fill_uniform(p.w, std::sqrt(6.0 / static_cast<double>(2 * dh)), rng);
    p.w = project_inf_ball(p.w, cfg.kappa);
    p.theta2 = DenseMatrix(dh, output_dim);
    fill_uniform(p.theta2, std::sqrt(6.0 / static_cast<double>(dh + output_dim)), rng);
    p.b.assign(dh, 0.0);
    return p;
}

TrainResult train(const Hypergraph& g, const DenseMatrix& x, std::span<const int> labels, const SplitSpec& splits,
                  const TrainConfig& cfg) {
    return train(build_operator(g), x, labels, splits, cfg);
}

TrainResult train(const PropagationOperator& op, const DenseMatrix& x, std::span<const int> labels,
                  const SplitSpec& splits, const TrainConfig& cfg) {
    cfg.validate();
    if (x.rows() != op.size()) throw ValidationError("feature rows do not match the hypergraph");
    std::size_t classes = 0;
    check_labels(labels, splits, op.size(), classes);

    TrainResult result;
    result.initial = initialize_params(x.cols(), classes, cfg);
    result.params = result.initial;
    ModelParams p = result.initial;
    Optimizer opt(cfg, p);
    Rng drop_rng = substream(cfg.seed, "dropout");

    DenseMatrix z_train, z_eval, u_prev;
    double best_val = -1.0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::string ctx = "epoch " + std::to_string(epoch) + ": ";
        MetricsRecord rec;
        rec.epoch = epoch;

        const DenseMatrix xd = apply_dropout(x, cfg.dropout, drop_rng);
        const bool warm = cfg.warm_start && !z_train.empty();
        auto fwd = forward(xd, op, p, cfg.activation, cfg.solver, warm ? &z_train : nullptr);
        if (!fwd.equilibrium.converged)
            throw SolverError(ctx + "forward solve did not converge in " + std::to_string(cfg.solver.max_iters) +
                              " iterations (last residual " + format_double(fwd.equilibrium.residuals.back()) + ")");
        const auto loss = cross_entropy_masked(fwd.prediction, labels, splits.train);
        rec.train_loss = loss.loss;
        rec.forward_iters = fwd.equilibrium.iterations;

        const DenseMatrix upstream = readout_upstream(loss.grad_logits, p.theta2);
        AdjointSolution adj;
        try {
            const bool warm_u = cfg.warm_start && !u_prev.empty();
            adj = solve_adjoint(op, p.w, fwd.equilibrium, cfg.activation, upstream, cfg.solver,
                                warm_u ? &u_prev : nullptr);
        } catch (const SolverError& e) {
            throw SolverError(ctx + e.what());
        }
        rec.adjoint_iters = adj.iterations;
        const GradientBundle grads = parameter_gradients(xd, op, fwd.equilibrium, adj, loss.grad_logits, p.theta2);
        if (!grads.all_finite()) throw SolverError(ctx + "non-finite gradient");

        opt.step(p, grads);
        p.w = project_inf_ball(p.w, p.kappa);
        rec.lambda_abs_w = power_iteration_abs(p.w, cfg.solver.power).value;
        if (cfg.warm_start) {
            z_train = std::move(fwd.equilibrium.z_star);
            u_prev = std::move(adj.u);
        }

        auto clean = forward(x, op, p, cfg.activation, cfg.solver, cfg.warm_start && !z_eval.empty() ? &z_eval : nullptr);
        if (!clean.equilibrium.converged) throw SolverError(ctx + "evaluation solve did not converge");
        const auto pred = predicted_classes(clean.prediction);
        if (!splits.val.empty()) rec.val_accuracy = evaluate_predictions(pred, labels, splits.val).accuracy;
        if (!splits.test.empty()) {
            const auto t = evaluate_predictions(pred, labels, splits.test);
            rec.test_accuracy = t.accuracy;
            rec.macro_f1 = t.macro_f1;
        }
        if (cfg.warm_start) z_eval = std::move(clean.equilibrium.z_star);

        const bool better = splits.val.empty() ? true : rec.val_accuracy > best_val;
        if (better) {
            best_val = rec.val_accuracy;
            result.params = p;
            result.best_epoch = epoch;
        }
        log::debug(ctx + "loss " + format_double(rec.train_loss) + " val " + format_double(rec.val_accuracy));
        result.metrics.push_back(rec);
    }
    return result;
}

std::vector<int> predicted_classes(const Prediction& pred) {
    std::vector<int> out(pred.logits.rows());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto row = pred.logits.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

EvalResult evaluate_predictions(std::span<const int> predicted, std::span<const int> labels,
                                std::span<const std::size_t> mask) {
    if (mask.empty()) throw ValidationError("evaluate: empty mask");
    int classes = 0;
    for (std::size_t i : mask) {
        if (i >= labels.size() || i >= predicted.size()) throw ValidationError("evaluate: mask index out of range");
        if (labels[i] < 0) throw ValidationError("evaluate: node " + std::to_string(i) + " is unlabeled");
        classes = std::max({classes, labels[i] + 1, predicted[i] + 1});
    }
    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    std::size_t correct = 0;
    for (std::size_t i : mask) {
        const int y = labels[i], yhat = predicted[i];
        if (y == yhat) {
            ++correct;
            ++tp[y];
        } else {
            ++fn[y];
            if (yhat >= 0) ++fp[yhat];
        }
    }
    EvalResult r;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(mask.size());
    double f1_sum = 0.0;
    std::size_t present = 0;
    for (int c = 0; c < classes; ++c) {
        if (tp[c] + fp[c] + fn[c] == 0) continue;
        ++present;
        f1_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    }
    r.macro_f1 = present ? f1_sum / static_cast<double>(present) : 0.0;
    return r;
}

EvalResult evaluate(const ModelParams& params, const PropagationOperator& op, const DenseMatrix& x,
                    std::span<const int> labels, std::span<const std::size_t> mask, const Activation& act,
                    const SolverConfig& solver) {
    if (mask.empty()) throw ValidationError("evaluate: empty mask");
    const auto fwd = forward(x, op, params, act, solver);
    if (!fwd.equilibrium.converged) throw SolverError("evaluate: forward solve did not converge");
    return evaluate_predictions(predicted_classes(fwd.prediction), labels, mask);
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records) {
    out << "epoch,train_loss,val_acc,test_acc,macro_f1,forward_iters,adjoint_iters,lambda_abs_w\n";
    for (const auto& r : records)
        out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_accuracy) << ','
            << format_double(r.test_accuracy) << ',' << format_double(r.macro_f1) << ',' << r.forward_iters << ','
            << r.adjoint_iters << ',' << format_double(r.lambda_abs_w) << '\n';
}

MetricSummary summarize(std::span<const double> values) {
    if (values.size() < 2) throw ValidationError("summarize: need at least two values");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    MetricSummary s;
    s.mean = mean;
    s.stddev = std::sqrt(ss / (n - 1.0));
    const double half = 1.96 * s.stddev / std::sqrt(n);
    s.ci_low = mean - half;
    s.ci_high = mean + half;
    return s;
}

StabilityReport repeat_runs(const PropagationOperator& op, const DenseMatrix& x, std::span<const int> labels,
                            const SplitSpec& splits, const TrainConfig& cfg, std::span<const std::uint64_t> seeds,
                            std::size_t jobs) {
    if (seeds.size() < 2) throw ValidationError("repeat_runs: need at least two seeds");
    StabilityReport report;
    report.runs.resize(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) {
            try {
                TrainConfig c = cfg;
                c.seed = seeds[k];
                const auto res = train(op, x, labels, splits, c);
                RunOutcome o;
                o.seed = seeds[k];
                o.best_epoch = res.best_epoch;
                if (res.best_epoch > 0) {
                    const auto& m = res.metrics[res.best_epoch - 1];
                    o.val_accuracy = m.val_accuracy;
                    o.test_accuracy = m.test_accuracy;
                    o.macro_f1 = m.macro_f1;
                }
                report.runs[k] = o;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, seeds.size());
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> acc, f1, val;
    for (const auto& r : report.runs) {
        acc.push_back(r.test_accuracy);
        f1.push_back(r.macro_f1);
        val.push_back(r.val_accuracy);
    }
    report.test_accuracy = summarize(acc);
    report.macro_f1 = summarize(f1);
    report.val_accuracy = summarize(val);
    return report;
}

std::string to_json(const StabilityReport& report) {
    auto summary = [](const MetricSummary& s) {
        return nlohmann::ordered_json{{"mean", s.mean}, {"std", s.stddev}, {"ci95", {s.ci_low, s.ci_high}}};
    };
    nlohmann::ordered_json j;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& r : report.runs)
        j["runs"].push_back({{"seed", r.seed},
                             {"best_epoch", r.best_epoch},
                             {"val_acc", r.val_accuracy},
                             {"test_acc", r.test_accuracy},
                             {"macro_f1", r.macro_f1}});
    j["test_acc"] = summary(report.test_accuracy);
    j["macro_f1"] = summary(report.macro_f1);
    j["val_acc"] = summary(report.val_accuracy);
    return j.dump(2);
}

} // namespace ihgnn
