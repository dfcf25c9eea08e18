#include "ihgnn/error.hpp"
#include "ihgnn/linalg.hpp"

#include <string>

namespace ihgnn {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)), col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size())
        throw ValidationError("SparseMatrix: inconsistent CSR arrays");
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1]) throw ValidationError("SparseMatrix: decreasing row offsets");
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            if (col_indices_[p] >= cols_)
                throw ValidationError("SparseMatrix: column index out of range in row " + std::to_string(i));
            if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1])
                throw ValidationError("SparseMatrix: column indices not strictly increasing in row " +
                                      std::to_string(i));
        }
    }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<Index> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = static_cast<Index>(i);
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    std::vector<std::size_t> offsets{0};
    std::vector<Index> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < dense.rows(); ++i) {
        for (std::size_t j = 0; j < dense.cols(); ++j) {
            if (dense(i, j) != 0.0) {
                cols.push_back(static_cast<Index>(j));
                vals.push_back(dense(i, j));
            }
        }
        offsets.push_back(cols.size());
    }
    return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) d(i, col_indices_[p]) = values_[p];
    return d;
}

} // namespace ihgnn
