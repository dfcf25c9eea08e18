#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace ihgnn {

// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    bool all_finite() const noexcept;
    bool same_shape(const DenseMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    DenseMatrix transposed() const;

    // Bitwise comparison of shape and entries.
    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

    DenseMatrix& operator+=(const DenseMatrix& other);
    DenseMatrix& operator-=(const DenseMatrix& other);
    DenseMatrix& operator*=(double s);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

// Compressed sparse row matrix. Column indices are strictly increasing within
// every row; iteration order is fixed so kernels are bit-reproducible.
class SparseMatrix {
public:
    using Index = std::uint32_t;

    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values);

    static SparseMatrix identity(std::size_t n);
    // Keeps exactly the nonzero entries of `dense`.
    static SparseMatrix from_dense(const DenseMatrix& dense);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const Index> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_cols(std::size_t i) const {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(std::size_t i) const {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    DenseMatrix to_dense() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Kernels. The default versions are OpenMP row-parallel; every output row is
// reduced in a fixed order, so results are bitwise independent of the thread
// count. The `reference` namespace holds plain serial loops used as oracles.
// ---------------------------------------------------------------------------

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);
// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

namespace reference {
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
} // namespace reference

// ||A||_inf: largest row sum of absolute values.
double max_row_abs_sum(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);
double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b);

struct PowerIterationOptions {
    std::size_t max_iters = 50;
    double tol = 1e-8;
    std::uint64_t fallback_seed = 0x5eed;
};

struct PowerIterationResult {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Largest eigenvalue of the entrywise absolute matrix |A| (its Perron root).
// Starts from the all-ones vector; restarts from a seeded random vector when the
// estimate collapses to zero.
PowerIterationResult power_iteration_abs(const DenseMatrix& a, const PowerIterationOptions& opts = {});
PowerIterationResult power_iteration_abs(const SparseMatrix& a, const PowerIterationOptions& opts = {});

} // namespace ihgnn
