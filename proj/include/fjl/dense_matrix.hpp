#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fjl {

/// Column-major matrix of doubles. Columns are the natural unit: a point set
/// stores one point per column.
class DenseMatrix {
public:
    /// Empty 0x0 matrix; only useful as a placeholder to assign into.
    DenseMatrix() = default;

    /// rows x cols filled with `fill`. Throws DimensionError if rows or cols is 0.
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    /// Takes ownership of column-major data of length rows * cols.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) noexcept { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const noexcept {
        return {data_.data() + j * rows_, rows_};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transpose() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double frobenius_norm(const DenseMatrix& a);

/// ||approx - exact||_F / ||exact||_F, or the absolute error when exact is zero.
double relative_frobenius_error(const DenseMatrix& approx, const DenseMatrix& exact);

}  // namespace fjl
