#pragma once

// Dense products for the final stage of the batch embedding.
//
// multiply_blocked splits G (m x n) into r = ceil(n / m) square blocks and
// M2 (n x p) into matching row blocks, multiplies each pair with Strassen's
// seven-product recursion, and sums the r partial products in block order.
// Strassen stands in for the asymptotically faster square-by-rectangular
// algorithms; MultiplyPlan is where a different fast product would plug in.

#include <cstddef>
#include <cstdint>
#include <optional>

#include "fjl/dense_matrix.hpp"

namespace fjl {

enum class MultiplyStrategy { naive, blocked_fast };

/// Shipped default, picked by micro-benchmark (see README).
inline constexpr std::size_t kDefaultStrassenCutoff = 256;

struct MultiplyPlan {
    MultiplyStrategy strategy = MultiplyStrategy::blocked_fast;
    /// Side length at or below which the recursion switches to the naive kernel.
    std::size_t strassen_cutoff = kDefaultStrassenCutoff;
    /// Width of the square blocks G is split into; unset means G.rows().
    std::optional<std::size_t> block_rows;

    /// Throws DimensionError if strassen_cutoff < 8 or block_rows == 0.
    void validate() const;
};

/// Number of scalar multiplications issued by a product.
struct MultiplyCounter {
    std::uint64_t multiplications = 0;
};

/// Tiled triple loop. Throws DimensionError if a.cols() != b.rows().
DenseMatrix multiply_naive(const DenseMatrix& a, const DenseMatrix& b,
                           MultiplyCounter* counter = nullptr);

/// A (s x s) times B (s x k). B is cut into ceil(k / s) column blocks of width <= s.
/// The recursion depth is the smallest d with ceil(s / 2^d) <= cutoff; A and each
/// block are zero-padded to multiples of 2^d, recursed d times, and the leaves
/// use the naive kernel.
DenseMatrix multiply_strassen(const DenseMatrix& a, const DenseMatrix& b, std::size_t cutoff,
                              MultiplyCounter* counter = nullptr);

/// G (m x n) times M2 (n x p) per the plan. Block partial sums are added in
/// order j = 0..r-1 whatever the thread count, so results are reproducible.
DenseMatrix multiply_blocked(const DenseMatrix& g, const DenseMatrix& m2, const MultiplyPlan& plan,
                             MultiplyCounter* counter = nullptr);

/// Multiplications multiply_blocked will issue for an (m x n) by (n x p)
/// product, counted analytically from the recursion tree. Naive: m * n * p.
std::uint64_t flop_estimate(std::size_t m, std::size_t n, std::size_t p, const MultiplyPlan& plan);

/// Multiplications of multiply_strassen for an (s x s) by (s x k) product.
std::uint64_t strassen_multiplications(std::size_t s, std::size_t k, std::size_t cutoff);

}  // namespace fjl
