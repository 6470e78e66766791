#pragma once

#include <cstddef>
#include <cstdint>

#include "fjl/dense_matrix.hpp"

namespace fjl {

enum class PointDistribution {
    gaussian,         // i.i.d. N(0, 1) entries
    sphere,           // gaussian columns normalised to unit length
    near_duplicates,  // a few gaussian centres plus 1e-3 scaled gaussian jitter
};

/// N x p point set drawn from stream (seed, "points").
DenseMatrix generate_points(std::size_t N, std::size_t p, std::uint64_t seed,
                            PointDistribution distribution = PointDistribution::gaussian);

/// Columns x_i - x_j for all i < j.
DenseMatrix pairwise_differences(const DenseMatrix& points);

/// E||g|| for g ~ N(0, I_N): sqrt(2) Gamma((N+1)/2) / Gamma(N/2).
double expected_gaussian_norm(std::size_t N);

}  // namespace fjl
