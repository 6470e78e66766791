#pragma once

// Johnson-Lindenstrauss transforms.
//
// The composed transform is x -> G R H D_xi x with
//   D_xi  random +-1 diagonal (SignVector),
//   H     unnormalised Sylvester Hadamard matrix on N_pad = 2^k coordinates,
//   R     n rows of H sampled uniformly with replacement, scaled by 1/sqrt(n),
//   G     dense m x n matrix of +-1/sqrt(m).
// Inputs of length N are zero-padded to N_pad, which leaves norms unchanged.
// With these scales E||Ax||^2 = ||x||^2 for every x.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fjl/dense_matrix.hpp"
#include "fjl/fast_multiply.hpp"
#include "fjl/hadamard.hpp"

namespace fjl {

class Rng;

/// Rademacher vector xi in {-1, +1}^N.
class SignVector {
public:
    /// Throws DimensionError if empty or an entry is not +-1.
    explicit SignVector(std::vector<std::int8_t> signs);

    static SignVector sample(std::size_t size, Rng& rng);

    std::size_t size() const noexcept { return signs_.size(); }
    std::span<const std::int8_t> signs() const noexcept { return signs_; }

    /// out[i] = xi[i] * x[i] for i < x.size(); out[i] = 0 beyond (zero padding).
    void apply(std::span<const double> x, std::span<double> out) const;

    friend bool operator==(const SignVector&, const SignVector&) = default;

private:
    std::vector<std::int8_t> signs_;
};

/// m x n matrix with entries sign * scale, scale = 1/sqrt(m). Column-major signs.
class DenseSignMatrix {
public:
    DenseSignMatrix(std::size_t rows, std::size_t cols, std::vector<std::int8_t> signs);

    static DenseSignMatrix sample(std::size_t rows, std::size_t cols, Rng& rng);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double scale() const noexcept { return scale_; }
    std::span<const std::int8_t> signs() const noexcept { return signs_; }

    double value(std::size_t i, std::size_t j) const noexcept {
        return signs_[j * rows_ + i] * scale_;
    }

    /// The scaled matrix as doubles.
    DenseMatrix to_dense() const;

    /// Plain matrix-vector product. Throws DimensionError on a length mismatch.
    std::vector<double> apply(std::span<const double> x) const;

    friend bool operator==(const DenseSignMatrix&, const DenseSignMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::int8_t> signs_;
    double scale_;
};

enum class InnerDimPolicy {
    /// n > N_pad is a planning error.
    strict,
    /// n is capped at N_pad and R becomes the identity selection.
    saturate,
};

/// Embedding dimensions for p points, distortion epsilon, failure probability eta:
///   m = ceil(c1 * eps^-2 * ln(p / eta))
///   n = ceil(c2 * eps^-2 * ln(p / eta) * (ln N)^4)
struct DimensionPlan {
    std::size_t p = 0;
    double epsilon = 0.0;
    double eta = 0.0;
    std::size_t N = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t N_pad = 0;
    /// n was capped at N_pad; the row sample is then 0..N_pad-1.
    bool saturated = false;

    friend bool operator==(const DimensionPlan&, const DimensionPlan&) = default;
};

/// Throws PlanningError on invalid parameters (p >= 1, 0 < eps < 1, 0 < eta < 1/2,
/// N >= 2, c1, c2 > 0) or when m <= n <= N_pad cannot hold under the policy.
DimensionPlan plan_dimensions(std::size_t p, double epsilon, double eta, std::size_t N, double c1,
                              double c2, InnerDimPolicy policy = InnerDimPolicy::strict);

/// Plan with hand-picked m and n; p, c1 and c2 are left at zero.
/// saturated = true requires n == N_pad and selects every row once.
DimensionPlan explicit_plan(std::size_t N, std::size_t m, std::size_t n, double epsilon = 0.5,
                            double eta = 0.1, bool saturated = false);

/// The sign-randomised subsampled Hadamard stage x -> (1/sqrt(n)) R H D_xi x.
class HadamardStage {
public:
    HadamardStage(std::size_t input_dim, SignVector xi, RowSample rows);

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t padded_dim() const noexcept { return xi_.size(); }
    std::size_t output_dim() const noexcept { return rows_.size(); }
    double scale() const noexcept { return scale_; }
    const SignVector& xi() const noexcept { return xi_; }
    const RowSample& rows() const noexcept { return rows_; }
    const TrimmedHadamard& kernel() const noexcept { return trimmed_; }

    std::vector<double> apply(std::span<const double> x) const;

    /// Sign flip only: N_pad x p matrix xi (.) x_padded per column.
    DenseMatrix flip_signs(const DenseMatrix& points) const;

    /// Trimmed transform and scaling of sign-flipped columns: n x p.
    DenseMatrix transform_flipped(const DenseMatrix& flipped) const;

    /// Additions/subtractions per column.
    std::uint64_t op_count() const noexcept;

    friend bool operator==(const HadamardStage& a, const HadamardStage& b) {
        return a.input_dim_ == b.input_dim_ && a.xi_ == b.xi_ && a.rows_ == b.rows_;
    }

private:
    void transform_column(std::span<const double> flipped, std::span<double> out,
                          std::span<double> scratch) const;

    std::size_t input_dim_;
    SignVector xi_;
    RowSample rows_;
    TrimmedHadamard trimmed_;
    bool full_;
    double scale_;
};

struct ComposedTransform {
    DimensionPlan plan;
    std::uint64_t seed = 0;
    HadamardStage stage;
    DenseSignMatrix g;

    std::size_t input_dim() const noexcept { return stage.input_dim(); }
    std::size_t output_dim() const noexcept { return g.rows(); }

    friend bool operator==(const ComposedTransform& a, const ComposedTransform& b) {
        return a.plan == b.plan && a.seed == b.seed && a.stage == b.stage && a.g == b.g;
    }
};

/// Wall-clock nanoseconds of the three batch stages.
struct StageTimings {
    std::int64_t sign_flip_ns = 0;  // M1 = D_xi M_E
    std::int64_t hadamard_ns = 0;   // M2 = R H M1
    std::int64_t dense_ns = 0;      // M3 = G M2
};

enum class BatchStrategy { per_point, blocked_fast, naive };

/// xi, rows and G come from independent streams tagged "xi", "rows", "G".
/// Same (plan, seed) gives a bit-identical transform.
ComposedTransform sample_composed(const DimensionPlan& plan, std::uint64_t seed);

/// Single-point path: pad, flip signs, trimmed transform, plain G multiply.
std::vector<double> apply_composed(const ComposedTransform& t, std::span<const double> x);

/// Three-step batch pipeline over the columns of points (N x p); the last step
/// goes through multiply_blocked with the given plan.
DenseMatrix apply_composed_batch(const ComposedTransform& t, const DenseMatrix& points,
                                 const MultiplyPlan& plan, StageTimings* timings = nullptr);

/// per_point when m <= sqrt(N_pad) (boundary inclusive), blocked_fast otherwise.
BatchStrategy route_batch(const DimensionPlan& plan);

/// Embed all columns with an explicit strategy. per_point applies G one column
/// at a time; naive and blocked_fast use the batch pipeline.
DenseMatrix embed(const ComposedTransform& t, const DenseMatrix& points, BatchStrategy strategy,
                  std::size_t strassen_cutoff = kDefaultStrassenCutoff,
                  StageTimings* timings = nullptr);

/// Dense m x N sign matrix, scale 1/sqrt(m), from stream "G".
DenseSignMatrix sample_dense_baseline(std::size_t m, std::size_t N, std::uint64_t seed);

DenseMatrix apply_dense_batch(const DenseSignMatrix& a, const DenseMatrix& points);

struct SparseEntry {
    std::uint32_t row;
    std::uint32_t col;
    double value;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse-projection FJLT x -> (1/sqrt(m)) P (1/sqrt(N_pad)) H D_xi x. Entries of
/// P are present with probability q and then N(0, 1/q).
struct FjltTransform {
    std::size_t m = 0;
    std::size_t input_dim = 0;
    std::size_t padded_dim = 0;
    double q = 1.0;
    std::uint64_t seed = 0;
    SignVector xi{std::vector<std::int8_t>{1}};
    std::vector<SparseEntry> entries;  // sorted by (row, col)

    friend bool operator==(const FjltTransform&, const FjltTransform&) = default;
};

/// q = min{c_q (ln p)^2 / N_pad, 1}, floored at 1/N_pad.
double fjlt_density(std::size_t p, std::size_t padded_dim, double c_q);

/// epsilon only sanity-checks the call (0 < eps < 1); m is given explicitly.
FjltTransform sample_fjlt(std::size_t p, double epsilon, std::size_t N, std::size_t m, double c_q,
                          std::uint64_t seed);

std::vector<double> apply_fjlt(const FjltTransform& t, std::span<const double> x);

DenseMatrix apply_fjlt_batch(const FjltTransform& t, const DenseMatrix& points);

}  // namespace fjl
