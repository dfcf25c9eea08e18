#include "ihgnn/model.hpp"

#include "ihgnn/error.hpp"
#include "ihgnn/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace ihgnn {

void ModelParams::validate() const {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in [0, 1), got " + format_double(kappa));
    const std::size_t dh = w.rows();
    if (w.cols() != dh) throw ValidationError("W must be square");
    if (theta1.cols() != dh) throw ValidationError("Theta1 must have d_h columns");
    if (theta2.rows() != dh) throw ValidationError("Theta2 must have d_h rows");
    if (b.size() != dh) throw ValidationError("b must have d_h entries");
}

Prediction make_prediction(DenseMatrix logits) {
    Prediction p;
    p.probabilities = DenseMatrix(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const auto z = logits.row(i);
        auto out = p.probabilities.row(i);
        if (z.empty()) continue;
        const double mx = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            out[j] = std::exp(z[j] - mx);
            s += out[j];
        }
        for (double& v : out) v /= s;
    }
    p.logits = std::move(logits);
    return p;
}

DenseMatrix affine_input(const DenseMatrix& x, const ModelParams& params) {
    if (x.cols() != params.theta1.rows())
        throw ValidationError("affine_input: X has " + std::to_string(x.cols()) + " features, Theta1 expects " +
                              std::to_string(params.theta1.rows()));
    if (params.b.size() != params.theta1.cols()) throw ValidationError("affine_input: b does not match Theta1");
    DenseMatrix xt = matmul(x, params.theta1);
    for (std::size_t i = 0; i < xt.rows(); ++i) {
        auto row = xt.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += params.b[j];
    }
    return xt;
}

ForwardResult forward(const DenseMatrix& x, const PropagationOperator& op, const ModelParams& params,
                      const Activation& act, const SolverConfig& cfg, const DenseMatrix* init) {
    params.validate();
    if (x.rows() != op.size()) throw ValidationError("forward: X rows do not match the hypergraph");
    ForwardResult r;
    r.equilibrium = solve_forward(op, params.w, affine_input(x, params), act, cfg, init);
    r.prediction = make_prediction(matmul(r.equilibrium.z_star, params.theta2));
    return r;
}

LossResult cross_entropy_masked(const Prediction& pred, std::span<const int> labels, std::span<const std::size_t> mask) {
    if (mask.empty()) throw ValidationError("cross_entropy_masked: empty mask");
    const DenseMatrix& logits = pred.logits;
    if (labels.size() != logits.rows()) throw ValidationError("cross_entropy_masked: label count mismatch");
    LossResult r;
    r.grad_logits = DenseMatrix(logits.rows(), logits.cols());
    const double inv = 1.0 / static_cast<double>(mask.size());
    long double total = 0.0L;
    for (std::size_t i : mask) {
        if (i >= logits.rows()) throw ValidationError("cross_entropy_masked: mask index out of range");
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols())
            throw ValidationError("cross_entropy_masked: invalid label on node " + std::to_string(i));
        const auto z = logits.row(i);
        const double mx = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - mx);
        total += (mx + std::log(s)) - z[static_cast<std::size_t>(y)];
        auto g = r.grad_logits.row(i);
        const auto p = pred.probabilities.row(i);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = p[j] * inv;
        g[static_cast<std::size_t>(y)] -= inv;
    }
    r.loss = static_cast<double>(total) * inv;
    return r;
}

namespace {

void project_row_l1(std::span<double> row, double radius, std::vector<double>& scratch) {
    double l1 = 0.0;
    for (double v : row) l1 += std::abs(v);
    if (l1 <= radius + kProjectionSlack) return;
    if (radius == 0.0) {
        std::fill(row.begin(), row.end(), 0.0);
        return;
    }
    scratch.resize(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) scratch[j] = std::abs(row[j]);
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    // Largest rho with u_rho > (sum_{r<=rho} u_r - radius) / rho.
    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < scratch.size(); ++k) {
        prefix += scratch[k];
        const double t = (prefix - radius) / static_cast<double>(k + 1);
        if (scratch[k] > t) theta = t;
        else break;
    }
    for (double& v : row) {
        const double mag = std::abs(v) - theta;
        v = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    }
}

} // namespace

DenseMatrix project_inf_ball(const DenseMatrix& w, double kappa) {
    if (!(kappa >= 0.0)) throw ValidationError("project_inf_ball: kappa must be nonnegative");
    DenseMatrix out = w;
    std::vector<double> scratch;
    for (std::size_t i = 0; i < out.rows(); ++i) project_row_l1(out.row(i), kappa, scratch);
    return out;
}

ModelParams rescaled(const ModelParams& params, double alpha) {
    if (!(alpha > 0.0)) throw ValidationError("rescaled: alpha must be positive");
    ModelParams p = params;
    p.w *= alpha;
    p.theta1 *= alpha;
    for (double& v : p.b) v *= alpha;
    p.theta2 *= 1.0 / alpha;
    return p;
}

ModelParams rebalanced(const ModelParams& params, double target) {
    if (!(target > 0.0 && target < 1.0)) throw ValidationError("rebalanced: target must lie in (0, 1)");
    const std::size_t d = params.w.rows();
    DenseMatrix a = params.w;
    for (double& x : a.values()) x = std::abs(x);
    // Neumann iteration; converges at rate rho(|W|)/target
    std::vector<double> v(d, 1.0), next(d);
    bool settled = false;
    for (int it = 0; it < 100000 && !settled; ++it) {
        settled = true;
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += a(i, j) * v[j];
            next[i] = 1.0 + s / target;
            if (!(next[i] < 1e150)) throw ValidationError("rebalanced: spectral radius of |W| is not below target");
            if (next[i] != v[i]) settled = false;
        }
        v.swap(next);
    }
    ModelParams p = params;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) p.w(i, j) = params.w(i, j) * v[j] / v[i];
    for (std::size_t r = 0; r < p.theta1.rows(); ++r)
        for (std::size_t j = 0; j < d; ++j) p.theta1(r, j) *= v[j];
    for (std::size_t j = 0; j < d; ++j) p.b[j] *= v[j];
    for (std::size_t i = 0; i < d; ++i)
        for (double& x : p.theta2.row(i)) x /= v[i];
    if (!(max_row_abs_sum(p.w) < target))
        throw ValidationError("rebalanced: spectral radius of |W| is not below target");
    p.kappa = target;
    return p;
}

// --- checkpoints -------------------------------------------------------------

namespace {

void write_matrix(std::ostream& out, const char* name, const DenseMatrix& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? " " : "") << format_double(row[j]);
        out << '\n';
    }
}

struct TokenReader {
    std::istream& in;

    std::string next(const char* what) {
        std::string tok;
        if (!(in >> tok)) throw ValidationError(std::string("checkpoint: unexpected end of file reading ") + what);
        return tok;
    }
    void expect(const char* word) {
        const auto tok = next(word);
        if (tok != word) throw ValidationError("checkpoint: expected '" + std::string(word) + "', got '" + tok + "'");
    }
    std::size_t count(const char* what) {
        const long long v = parse_int(next(what));
        if (v < 0) throw ValidationError(std::string("checkpoint: negative ") + what);
        return static_cast<std::size_t>(v);
    }
    DenseMatrix matrix(const char* name) {
        expect(name);
        const std::size_t r = count(name);
        const std::size_t c = count(name);
        std::vector<double> v(r * c);
        for (double& x : v) x = parse_double(next(name));
        return DenseMatrix(r, c, std::move(v));
    }
};

} // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    ckpt.params.validate();
    out << "ihgnn-checkpoint " << kCheckpointVersion << '\n';
    out << "activation " << ckpt.activation.name() << '\n';
    out << "kappa " << format_double(ckpt.params.kappa) << '\n';
    write_matrix(out, "w", ckpt.params.w);
    write_matrix(out, "theta1", ckpt.params.theta1);
    write_matrix(out, "theta2", ckpt.params.theta2);
    out << "b " << ckpt.params.b.size() << '\n';
    for (std::size_t j = 0; j < ckpt.params.b.size(); ++j) out << (j ? " " : "") << format_double(ckpt.params.b[j]);
    out << "\nend\n";
}

Checkpoint read_checkpoint(std::istream& in) {
    TokenReader rd{in};
    rd.expect("ihgnn-checkpoint");
    const long long version = parse_int(rd.next("version"));
    if (version != kCheckpointVersion)
        throw ValidationError("checkpoint: unsupported format version " + std::to_string(version));
    Checkpoint ck;
    rd.expect("activation");
    ck.activation = Activation::parse(rd.next("activation"));
    rd.expect("kappa");
    ck.params.kappa = parse_double(rd.next("kappa"));
    ck.params.w = rd.matrix("w");
    ck.params.theta1 = rd.matrix("theta1");
    ck.params.theta2 = rd.matrix("theta2");
    rd.expect("b");
    ck.params.b.resize(rd.count("b"));
    for (double& v : ck.params.b) v = parse_double(rd.next("b"));
    rd.expect("end");
    ck.params.validate();
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return read_checkpoint(in);
}

} // namespace ihgnn
