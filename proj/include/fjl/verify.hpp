#pragma once

// Empirical checks of the JL property and the results built on it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fjl/dense_matrix.hpp"
#include "fjl/transforms.hpp"

namespace fjl {

/// Maps a point set (one point per column) to its embedding.
using BatchApplier = std::function<DenseMatrix(const DenseMatrix&)>;

struct DistortionReport {
    /// ||Ax||^2 / ||x||^2 for every nonzero column, in column order.
    std::vector<double> per_point_ratio;
    double max_distortion = 0.0;   // max |ratio - 1|
    double mean_distortion = 0.0;  // mean |ratio - 1|
    double epsilon_target = 0.0;
    bool pass = false;  // max_distortion <= epsilon_target
    std::size_t zero_columns_skipped = 0;
};

/// Compares column norms of points and embedded. Zero columns are skipped and
/// counted. Throws EmptyReportError if every column is zero.
DistortionReport distortion_report(const DenseMatrix& points, const DenseMatrix& embedded,
                                   double epsilon);

DistortionReport distortion_report(const BatchApplier& apply, const DenseMatrix& points,
                                   double epsilon);

/// One-sided Clopper-Pearson upper bound on a binomial rate.
double clopper_pearson_upper(std::size_t failures, std::size_t trials, double confidence = 0.95);

/// One-sided Clopper-Pearson lower bound on a binomial rate.
double clopper_pearson_lower(std::size_t failures, std::size_t trials, double confidence = 0.95);

/// Largest failure count whose upper bound is still <= eta, or nullopt if even
/// zero failures cannot certify eta with this many trials.
std::optional<std::size_t> max_certifiable_failures(std::size_t trials, double eta,
                                                    double confidence = 0.95);

struct FailureRate {
    std::size_t trials = 0;  // trials actually run
    std::size_t failures = 0;
    double rate = 0.0;
    double upper_95 = 1.0;  // one-sided Clopper-Pearson
    bool stopped_early = false;
    std::vector<double> max_distortion;  // per trial
};

struct FailureRateOptions {
    /// Unset routes with route_batch(plan).
    std::optional<BatchStrategy> strategy;
    std::size_t strassen_cutoff = kDefaultStrassenCutoff;
    /// Stop as soon as failures exceed this count.
    std::optional<std::size_t> stop_after_failures;
};

/// Samples a fresh composed transform per trial (seed derived from (seed,
/// "trial", t)) and counts the trials whose distortion exceeds plan.epsilon.
FailureRate failure_rate(const DimensionPlan& plan, const DenseMatrix& points, std::size_t trials,
                         std::uint64_t seed, const FailureRateOptions& options = {});

/// Same, for any family: sample(trial_seed) returns the applier for that trial.
FailureRate failure_rate(const std::function<BatchApplier(std::uint64_t)>& sample,
                         const DenseMatrix& points, double epsilon, std::size_t trials,
                         std::uint64_t seed, std::optional<std::size_t> stop_after_failures = {});

struct RipReport {
    std::size_t k = 0;
    /// max over |S| = k of the spectral deviation ||Phi_S^T Phi_S - I||.
    double delta_hat = 0.0;
    std::uint64_t supports_checked = 0;
    std::vector<std::size_t> worst_support;
};

inline constexpr std::uint64_t kRipSupportGuard = 1'000'000;

/// Exhaustive restricted-isometry constant over all C(N, k) supports via the
/// eigenvalues of each k x k Gram block. Throws InstanceTooLargeError when
/// C(N, k) exceeds max_supports, DimensionError when k is 0 or exceeds N.
RipReport rip_bruteforce(const DenseMatrix& phi, std::size_t k,
                         std::uint64_t max_supports = kRipSupportGuard);

struct RipToJlReport {
    RipReport rip;
    double epsilon = 0.0;
    double eta = 0.0;
    /// 40 ln(4p / eta): the sparsity the sign-randomisation argument asks for.
    double k_required = 0.0;
    bool delta_condition = false;  // delta_hat <= epsilon / 4
    bool k_condition = false;      // k >= k_required
    bool hypothesis_met = false;
    std::size_t trials = 0;
    std::size_t failures = 0;
    double failure_rate = 0.0;
    /// failure_rate <= eta; only set when the hypothesis holds.
    std::optional<bool> verdict;
};

/// Measures delta_hat for Phi, then the failure rate of Phi D_xi on the points
/// over fresh sign vectors.
RipToJlReport riptojl_check(const DenseMatrix& phi, std::size_t k, const DenseMatrix& points,
                            double epsilon, double eta, std::size_t trials, std::uint64_t seed);

/// Two-stage embedding: inner B is the subsampled Hadamard stage (N -> n), or
/// the identity (n == N) when identity_inner is set; outer A is a dense sign
/// matrix (n -> m). Each stage is judged at epsilon / 3.
struct CompositionConfig {
    std::size_t N = 0;
    std::size_t n = 0;
    std::size_t m = 0;
    double epsilon = 0.0;
    double eta = 0.0;
    bool identity_inner = false;
};

struct CompositionReport {
    std::size_t trials = 0;
    std::size_t inner_failures = 0;  // B distorted some norm by more than eps/3
    std::size_t outer_failures = 0;  // A distorted some norm of BE by more than eps/3
    std::size_t both_preserved = 0;
    /// Points of both-preserved trials whose composed ratio left [(1-eps/3)^2, (1+eps/3)^2].
    std::size_t interval_violations = 0;
    std::size_t composed_failures = 0;  // composed ratio outside [1-eps, 1+eps]
    double composed_failure_rate = 0.0;
    double composed_upper_95 = 1.0;
    std::vector<double> composed_max_distortion;  // per trial
    std::vector<double> outer_max_distortion;     // per trial
};

CompositionReport composition_check(const CompositionConfig& config, const DenseMatrix& points,
                                    std::size_t trials, std::uint64_t seed);

/// [(1-eps/3)^2, (1+eps/3)^2] is contained in [1-eps, 1+eps].
bool composition_interval_contained(double epsilon);

struct ApproxMatmulResult {
    DenseMatrix product;  // (S A^T)^T (S B)
    /// ||AB - product||_F / (||A||_F ||B||_F); 0 when A or B is zero.
    double error_ratio = 0.0;
};

/// Throws DimensionError if a.cols() != b.rows().
ApproxMatmulResult approx_matmul(const DenseMatrix& a, const DenseMatrix& b,
                                 const BatchApplier& sketch);

struct CalibrationStep {
    double c1 = 0.0;
    double c2 = 0.0;
    bool feasible = false;
    std::string note;  // planning error message when infeasible
    std::size_t m = 0;
    std::size_t n = 0;
    FailureRate rate;
    bool pass = false;
};

struct CalibrationConfig {
    std::size_t N = 1024;
    double epsilon = 0.3;
    double eta = 0.05;
    std::size_t trials = 300;
    std::uint64_t seed = 0;
    InnerDimPolicy policy = InnerDimPolicy::saturate;
    std::vector<double> grid{1, 2, 4, 6, 8, 12, 16};
    FailureRateOptions options;
};

struct CalibrationResult {
    double c1 = 0.0;
    double c2 = 0.0;
    DimensionPlan plan;
    std::vector<CalibrationStep> steps;
};

/// Smallest c1 on the grid (with c2 at the grid maximum), then the smallest c2
/// for that c1, whose failure rate is <= eta at 95% confidence on the points.
/// Throws CalibrationError when no candidate passes.
CalibrationResult calibrate_constants(const DenseMatrix& points, const CalibrationConfig& config);

}  // namespace fjl
