#include "ihgnn/error.hpp"
#include "ihgnn/linalg.hpp"

#include <cstdint>
#include <string>

namespace ihgnn {

namespace {

// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::size_t kParallelWork = 1u << 15;

void require(bool ok, const char* what, std::size_t ar, std::size_t ac, std::size_t br, std::size_t bc) {
    if (!ok)
        throw ValidationError(std::string(what) + ": dimension mismatch " + std::to_string(ar) + "x" +
                              std::to_string(ac) + " and " + std::to_string(br) + "x" + std::to_string(bc));
}

inline void axpy_row(double alpha, const double* __restrict x, double* __restrict y, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) y[j] += alpha * x[j];
}

} // namespace

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), "spmm", a.rows(), a.cols(), b.rows(), b.cols());
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t n = b.cols();
    const auto rows = static_cast<std::int64_t>(a.rows());
    const bool par = a.nnz() * n > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < rows; ++i) {
        const auto cols = a.row_cols(static_cast<std::size_t>(i));
        const auto vals = a.row_values(static_cast<std::size_t>(i));
        double* out = c.data() + static_cast<std::size_t>(i) * n;
        for (std::size_t p = 0; p < cols.size(); ++p) axpy_row(vals[p], b.data() + cols[p] * n, out, n);
    }
    return c;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.rows(), "matmul", a.rows(), a.cols(), b.rows(), b.cols());
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t inner = a.cols();
    const std::size_t n = b.cols();
    const auto rows = static_cast<std::int64_t>(a.rows());
    const bool par = a.rows() * inner * n > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* arow = a.data() + static_cast<std::size_t>(i) * inner;
        double* out = c.data() + static_cast<std::size_t>(i) * n;
        for (std::size_t k = 0; k < inner; ++k) {
            const double v = arow[k];
            if (v == 0.0) continue; // binary bag-of-words features are mostly zero
            axpy_row(v, b.data() + k * n, out, n);
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.rows() == b.rows(), "matmul_tn", a.rows(), a.cols(), b.rows(), b.cols());
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t shared = a.rows();
    const std::size_t p = a.cols();
    const std::size_t n = b.cols();
    const auto out_rows = static_cast<std::int64_t>(p);
    const bool par = shared * p * n > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t k = 0; k < out_rows; ++k) {
        double* out = c.data() + static_cast<std::size_t>(k) * n;
        for (std::size_t i = 0; i < shared; ++i) {
            const double v = a.data()[i * p + static_cast<std::size_t>(k)];
            if (v == 0.0) continue;
            axpy_row(v, b.data() + i * n, out, n);
        }
    }
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    require(a.cols() == b.cols(), "matmul_nt", a.rows(), a.cols(), b.rows(), b.cols());
    DenseMatrix c(a.rows(), b.rows());
    const std::size_t inner = a.cols();
    const std::size_t n = b.rows();
    const auto rows = static_cast<std::int64_t>(a.rows());
    const bool par = a.rows() * inner * n > kParallelWork;
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* arow = a.data() + static_cast<std::size_t>(i) * inner;
        double* out = c.data() + static_cast<std::size_t>(i) * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.data() + j * inner;
            double s = 0.0;
            for (std::size_t k = 0; k < inner; ++k) s += arow[k] * brow[k];
            out[j] = s;
        }
    }
    return c;
}

} // namespace ihgnn
