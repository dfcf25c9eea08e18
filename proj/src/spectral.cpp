#include "ihgnn/error.hpp"
#include "ihgnn/linalg.hpp"
#include "ihgnn/rng.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace ihgnn {

namespace {

double norm2(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += static_cast<long double>(x) * x;
    return static_cast<double>(std::sqrt(s));
}

// `apply(x, y)` writes y = |A| x.
template <class Apply>
PowerIterationResult perron_root(std::size_t n, Apply&& apply, const PowerIterationOptions& opts) {
    if (opts.max_iters == 0) throw ValidationError("power_iteration_abs: max_iters must be >= 1");
    PowerIterationResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> y(n);
    bool restarted = false;
    double prev = -1.0;
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
        apply(v, y);
        const double lambda = norm2(y);
        res.iterations = it;
        if (lambda == 0.0) {
            if (restarted) {
                // |A|^k annihilates two unrelated starts: nilpotent, spectrum {0}.
                res.value = 0.0;
                res.converged = true;
                return res;
            }
            restarted = true;
            Rng rng(opts.fallback_seed);
            std::uniform_real_distribution<double> unit(0.5, 1.5);
            for (double& x : v) x = unit(rng);
            const double nv = norm2(v);
            for (double& x : v) x /= nv;
            prev = -1.0;
            continue;
        }
        res.value = lambda;
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / lambda;
        if (prev >= 0.0 && std::abs(lambda - prev) < opts.tol) {
            res.converged = true;
            return res;
        }
        prev = lambda;
    }
    return res;
}

} // namespace

PowerIterationResult power_iteration_abs(const DenseMatrix& a, const PowerIterationOptions& opts) {
    if (a.rows() != a.cols()) throw ValidationError("power_iteration_abs: matrix is not square");
    const std::size_t n = a.rows();
    return perron_root(
        n,
        [&](const std::vector<double>& x, std::vector<double>& y) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                const auto row = a.row(i);
                for (std::size_t j = 0; j < n; ++j) s += std::abs(row[j]) * x[j];
                y[i] = s;
            }
        },
        opts);
}

PowerIterationResult power_iteration_abs(const SparseMatrix& a, const PowerIterationOptions& opts) {
    if (a.rows() != a.cols()) throw ValidationError("power_iteration_abs: matrix is not square");
    return perron_root(
        a.rows(),
        [&](const std::vector<double>& x, std::vector<double>& y) {
            for (std::size_t i = 0; i < a.rows(); ++i) {
                const auto cols = a.row_cols(i);
                const auto vals = a.row_values(i);
                double s = 0.0;
                for (std::size_t p = 0; p < cols.size(); ++p) s += std::abs(vals[p]) * x[cols[p]];
                y[i] = s;
            }
        },
        opts);
}

} // namespace ihgnn
