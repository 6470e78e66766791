#include "fjl/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "fjl/error.hpp"
#include "fjl/rng.hpp"

namespace fjl {

DenseMatrix generate_points(std::size_t N, std::size_t p, std::uint64_t seed,
                            PointDistribution distribution) {
    Rng rng(derive_seed(seed, "points"));
    DenseMatrix points(N, p);
    if (distribution == PointDistribution::near_duplicates) {
        const std::size_t centres = std::max<std::size_t>(1, std::min<std::size_t>(p, 4));
        DenseMatrix base(N, centres);
        for (auto& v : base.data()) v = rng.normal();
        for (std::size_t j = 0; j < p; ++j) {
            const auto c = base.col(j % centres);
            auto out = points.col(j);
            for (std::size_t i = 0; i < N; ++i) out[i] = c[i] + 1e-3 * rng.normal();
        }
        return points;
    }
    for (auto& v : points.data()) v = rng.normal();
    if (distribution == PointDistribution::sphere) {
        for (std::size_t j = 0; j < p; ++j) {
            auto col = points.col(j);
            double s = 0.0;
            for (double v : col) s += v * v;
            const double inv = 1.0 / std::sqrt(s);
            for (auto& v : col) v *= inv;
        }
    }
    return points;
}

DenseMatrix pairwise_differences(const DenseMatrix& points) {
    const std::size_t p = points.cols();
    if (p < 2) throw DimensionError("pairwise differences need at least two points");
    DenseMatrix out(points.rows(), p * (p - 1) / 2);
    std::size_t k = 0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j, ++k) {
            const auto a = points.col(i);
            const auto b = points.col(j);
            auto d = out.col(k);
            for (std::size_t r = 0; r < points.rows(); ++r) d[r] = a[r] - b[r];
        }
    }
    return out;
}

double expected_gaussian_norm(std::size_t N) {
    const double n = static_cast<double>(N);
    return std::sqrt(2.0) * std::exp(std::lgamma((n + 1.0) / 2.0) - std::lgamma(n / 2.0));
}

}  // namespace fjl
