#include "ihgnn/error.hpp"
#include "ihgnn/linalg.hpp"

#include <cmath>
#include <string>

namespace ihgnn {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols)
        throw ValidationError("DenseMatrix: " + std::to_string(values_.size()) + " values for a " +
                              std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw ValidationError("DenseMatrix::from_rows: ragged rows");
        v.insert(v.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(v));
}

bool DenseMatrix::all_finite() const noexcept {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

namespace {
void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
    if (!a.same_shape(b))
        throw ValidationError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()));
}
} // namespace

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "hadamard");
    DenseMatrix out(a.rows(), a.cols());
    auto o = out.values();
    auto x = a.values();
    auto y = b.values();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = x[k] * y[k];
    return out;
}

double max_row_abs_sum(const DenseMatrix& a) {
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double v : a.row(i)) s += std::abs(v);
        if (s > best) best = s;
    }
    return best;
}

double frobenius_norm(const DenseMatrix& a) {
    long double s = 0.0L;
    for (double v : a.values()) s += static_cast<long double>(v) * v;
    return static_cast<double>(std::sqrt(s));
}

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
    require_same_shape(a, b, "frobenius_distance");
    long double s = 0.0L;
    auto x = a.values();
    auto y = b.values();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const long double d = static_cast<long double>(x[k]) - y[k];
        s += d * d;
    }
    return static_cast<double>(std::sqrt(s));
}

} // namespace ihgnn
