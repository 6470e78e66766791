#include "fjl/dense_matrix.hpp"

#include <cmath>
#include <string>

#include "fjl/error.hpp"

namespace fjl {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    data_.assign(rows * cols, fill);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
    if (data_.size() != rows * cols) {
        throw DimensionError("matrix data length " + std::to_string(data_.size()) + " != " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j) {
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    }
    return t;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double relative_frobenius_error(const DenseMatrix& approx, const DenseMatrix& exact) {
    if (approx.rows() != exact.rows() || approx.cols() != exact.cols()) {
        throw DimensionError("relative error of differently shaped matrices");
    }
    double diff = 0.0;
    double ref = 0.0;
    auto a = approx.data();
    auto e = exact.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - e[i]) * (a[i] - e[i]);
        ref += e[i] * e[i];
    }
    return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

}  // namespace fjl
