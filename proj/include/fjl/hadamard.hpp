#pragma once

// Walsh-Hadamard kernels.
//
// H_N is the unnormalised Sylvester Hadamard matrix, H_1 = [1] and
// H_2N = [[H_N, H_N], [H_N, -H_N]]. It is never materialised. All kernels
// split on the top index bit first, so the trimmed and full transforms run
// the same additions in the same order and agree bit for bit.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fjl {

class Rng;

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Smallest power of two >= n (1 for n == 0).
std::size_t next_power_of_two(std::size_t n) noexcept;

/// floor(log2(n)) for n >= 1.
unsigned log2_floor(std::size_t n) noexcept;

/// Length of a Hadamard transform: N = 2^k, N >= 1.
class HadamardDim {
public:
    /// Throws DimensionError unless size is a power of two.
    explicit HadamardDim(std::size_t size);

    std::size_t size() const noexcept { return size_; }
    unsigned log2() const noexcept { return log2_; }

private:
    std::size_t size_;
    unsigned log2_;
};

/// Row indices of H, drawn uniformly with replacement. Duplicates are kept.
class RowSample {
public:
    /// Throws DimensionError if indices is empty or any index >= dimension.
    RowSample(std::vector<std::uint32_t> indices, std::size_t dimension);

    /// count indices drawn uniformly from [0, dimension) with replacement.
    static RowSample uniform(std::size_t count, std::size_t dimension, Rng& rng);

    /// 0, 1, ..., dimension - 1.
    static RowSample all(std::size_t dimension);

    std::span<const std::uint32_t> indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t distinct_count() const;

    /// True when the sample is exactly 0, 1, ..., dimension - 1.
    bool is_identity() const noexcept;

    friend bool operator==(const RowSample&, const RowSample&) = default;

private:
    std::vector<std::uint32_t> indices_;
    std::size_t dimension_;
};

/// In-place H·x. Throws DimensionError for a non-power-of-two length.
void fwht_inplace(std::span<double> x);

/// H·x.
std::vector<double> fwht_full(std::span<const double> x);

/// Rows of H·x selected by a RowSample, computed by recursive half-splitting:
/// requested indices with top bit 0 descend into H_{N/2}(x1 + x2), those with
/// top bit 1 into H_{N/2}(x1 - x2), and branches with no request are pruned.
///
/// Cost bound: op_count() <= kCostConstant * N * (log2(distinct rows) + 1).
/// A node of length L visited on the way to a request costs at most L
/// additions, at most min(2^l, d) nodes are live on level l, so the total is
/// at most N * (ceil(log2 d) + 2) <= 2 * N * (log2 d + 1).
///
/// The plan is built once per RowSample and reused across columns.
class TrimmedHadamard {
public:
    static constexpr double kCostConstant = 2.0;

    explicit TrimmedHadamard(const RowSample& rows);

    std::size_t input_size() const noexcept { return dim_; }
    std::size_t output_size() const noexcept { return out_size_; }

    /// Additions and subtractions performed by one apply().
    std::uint64_t op_count() const noexcept { return op_count_; }

    /// Scratch length required by apply().
    std::size_t scratch_size() const noexcept { return dim_; }

    /// out[j] = (H x)[rows[j]]. scratch must hold scratch_size() doubles.
    /// When ops is non-null, every executed addition/subtraction increments it.
    void apply(std::span<const double> x, std::span<double> out, std::span<double> scratch,
               std::uint64_t* ops = nullptr) const;

    std::vector<double> apply(std::span<const double> x) const;

private:
    struct Request {
        std::uint32_t index;
        std::uint32_t position;
    };

    template <bool Compute>
    void recurse(const double* x, std::size_t len, const Request* first, const Request* last,
                 double* scratch, double* out, std::uint64_t* ops) const;

    std::size_t dim_;
    std::size_t out_size_;
    std::vector<Request> requests_;  // sorted by index
    std::uint64_t op_count_ = 0;
};

/// (H x) restricted to rows, in the order of rows.
std::vector<double> fwht_trimmed(std::span<const double> x, const RowSample& rows);

/// Exact number of additions/subtractions fwht_trimmed performs for (N, rows).
std::uint64_t fwht_op_count(std::size_t dimension, const RowSample& rows);

}  // namespace fjl
