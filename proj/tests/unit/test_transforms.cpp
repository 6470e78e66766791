#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fjl/error.hpp"
#include "fjl/io.hpp"
#include "fjl/rng.hpp"
#include "fjl/transforms.hpp"
#include "oracles.hpp"

using namespace fjl;

namespace {

std::vector<double> gaussian(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> dist;
    std::vector<double> x(n);
    for (double& v : x) v = dist(gen);
    return x;
}

std::vector<double> unit(std::size_t n, std::mt19937_64& gen) {
    auto x = gaussian(n, gen);
    const double norm = std::sqrt(oracle::squared_norm(x));
    for (double& v : x) v /= norm;
    return x;
}

/// Mean of samples is within 3 standard errors of 1.
void expect_unbiased(const std::vector<double>& samples) {
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(samples.size() - 1);
    const double se = std::sqrt(var / static_cast<double>(samples.size()));
    EXPECT_LE(std::abs(mean - 1.0), 3.0 * se) << "mean " << mean << " se " << se;
}

}  // namespace

TEST(Plan, SmallIntegerExample) {
    const auto plan = plan_dimensions(1, 0.5, 0.25, 1024, 1.0, 1.0, InnerDimPolicy::saturate);
    EXPECT_EQ(plan.m, 6u);
    EXPECT_TRUE(plan.saturated);
    EXPECT_EQ(plan.n, 1024u);
}

TEST(Plan, LargeExamplePinned) {
    EXPECT_THROW(plan_dimensions(1'000'000, 0.25, 0.01, 1u << 20, 8, 8), PlanningError);
    const auto plan =
        plan_dimensions(1'000'000, 0.25, 0.01, 1u << 20, 8, 8, InnerDimPolicy::saturate);
    EXPECT_EQ(plan.m, 2358u);
    EXPECT_EQ(plan.n, 1u << 20);
    EXPECT_EQ(plan.N_pad, 1u << 20);
    EXPECT_TRUE(plan.saturated);
}

TEST(Plan, StrictWhenInnerDimensionFits) {
    // c2 tiny enough that n lands between m and N_pad.
    const auto plan = plan_dimensions(10, 0.5, 0.1, 4096, 1.0, 0.01);
    EXPECT_FALSE(plan.saturated);
    EXPECT_EQ(plan.m, static_cast<std::size_t>(std::ceil(4.0 * std::log(100.0))));
    const double ln_n = std::log(4096.0);
    EXPECT_EQ(plan.n, static_cast<std::size_t>(std::ceil(0.04 * std::log(100.0) * std::pow(ln_n, 4))));
    EXPECT_LE(plan.m, plan.n);
    EXPECT_LE(plan.n, plan.N_pad);
}

TEST(Plan, InfeasibleAndInvalid) {
    EXPECT_THROW(plan_dimensions(2, 0.9, 0.4, 4, 1, 100), PlanningError);
    EXPECT_THROW(plan_dimensions(0, 0.5, 0.1, 64, 1, 1), PlanningError);
    EXPECT_THROW(plan_dimensions(5, 1.0, 0.1, 64, 1, 1), PlanningError);
    EXPECT_THROW(plan_dimensions(5, 0.5, 0.5, 64, 1, 1), PlanningError);
    EXPECT_THROW(plan_dimensions(5, 0.5, 0.1, 1, 1, 1), PlanningError);
    EXPECT_THROW(plan_dimensions(5, 0.5, 0.1, 64, 0, 1), PlanningError);
    // m > N_pad cannot be saved by saturation.
    EXPECT_THROW(plan_dimensions(1000, 0.1, 0.01, 64, 4, 1, InnerDimPolicy::saturate), PlanningError);
}

TEST(Sampling, SameSeedSameBytes) {
    const auto plan = explicit_plan(50, 8, 20);
    EXPECT_EQ(encode_transform(sample_composed(plan, 42)), encode_transform(sample_composed(plan, 42)));
}

TEST(Sampling, DifferentSeedsDiffer) {
    const auto plan = explicit_plan(50, 8, 20);
    const auto a = sample_composed(plan, 1);
    const auto b = sample_composed(plan, 2);
    EXPECT_FALSE(a.stage.xi() == b.stage.xi());
    EXPECT_FALSE(a.stage.rows() == b.stage.rows());
    EXPECT_FALSE(a.g == b.g);
}

TEST(Sampling, SignMarginals) {
    Rng rng(derive_seed(99, "xi"));
    const auto xi = SignVector::sample(100'000, rng);
    double mean = 0.0;
    for (auto s : xi.signs()) mean += s;
    mean /= 100'000.0;
    EXPECT_LE(std::abs(mean), 3.0 / std::sqrt(100'000.0));
}

TEST(Sampling, SaturatedPlanUsesEveryRow) {
    const auto t = sample_composed(explicit_plan(100, 8, 128, 0.5, 0.1, true), 3);
    EXPECT_TRUE(t.stage.rows().is_identity());
}

TEST(Composed, MatchesExplicitDenseProduct) {
    std::mt19937_64 gen(31);
    for (auto [N, m, n] : {std::tuple{64u, 8u, 40u}, {37u, 5u, 16u}, {16u, 4u, 16u}}) {
        const auto plan = explicit_plan(N, m, n);
        const auto t = sample_composed(plan, 7 + N);
        const auto x = gaussian(N, gen);
        const double row_scale = 1.0 / std::sqrt(static_cast<double>(n));
        std::vector<double> expected(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                double a = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    a += t.g.value(i, k) * row_scale *
                         oracle::hadamard_entry(t.stage.rows().indices()[k], j) * t.stage.xi().signs()[j];
                }
                expected[i] += a * x[j];
            }
        }
        const auto got = apply_composed(t, x);
        for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(got[i], expected[i], 1e-12) << N;
    }
}

TEST(Composed, ZeroAndHomogeneity) {
    std::mt19937_64 gen(32);
    const auto t = sample_composed(explicit_plan(100, 10, 64), 5);
    EXPECT_EQ(apply_composed(t, std::vector<double>(100, 0.0)), std::vector<double>(10, 0.0));
    auto x = gaussian(100, gen);
    auto x2 = x;
    for (double& v : x2) v *= 2.0;
    const auto y = apply_composed(t, x);
    const auto y2 = apply_composed(t, x2);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y2[i], 2.0 * y[i], 1e-12 * std::abs(y2[i]) + 1e-15);
}

TEST(Composed, WrongLengthThrows) {
    const auto t = sample_composed(explicit_plan(100, 10, 64), 5);
    EXPECT_THROW(apply_composed(t, std::vector<double>(99, 1.0)), DimensionError);
}

TEST(Composed, UnbiasedOnUnitVector) {
    std::mt19937_64 gen(33);
    const auto x = unit(60, gen);
    const auto plan = explicit_plan(60, 8, 16);
    std::vector<double> samples;
    for (std::uint64_t s = 0; s < 10'000; ++s) {
        samples.push_back(oracle::squared_norm(apply_composed(sample_composed(plan, s), x)));
    }
    expect_unbiased(samples);
}

TEST(Dense, ScaleAndDeterminism) {
    const auto a = sample_dense_baseline(16, 40, 9);
    EXPECT_EQ(a.scale(), 1.0 / std::sqrt(16.0));
    EXPECT_EQ(a, sample_dense_baseline(16, 40, 9));
    EXPECT_FALSE(a == sample_dense_baseline(16, 40, 10));
}

TEST(Dense, UnbiasedOnUnitVector) {
    std::mt19937_64 gen(34);
    const auto x = unit(40, gen);
    std::vector<double> samples;
    for (std::uint64_t s = 0; s < 10'000; ++s) {
        samples.push_back(oracle::squared_norm(sample_dense_baseline(6, 40, s).apply(x)));
    }
    expect_unbiased(samples);
}

TEST(Fjlt, DensityPinned) {
    EXPECT_NEAR(fjlt_density(1000, 1u << 16, 1.0), 7.281049040879147e-4, 1e-15);
    EXPECT_EQ(fjlt_density(1000, 32, 1.0), 1.0);
    EXPECT_EQ(fjlt_density(1, 1024, 1.0), 1.0 / 1024.0);
}

TEST(Fjlt, ZeroAndDeterminism) {
    const auto t = sample_fjlt(100, 0.5, 200, 12, 1.0, 4);
    EXPECT_EQ(apply_fjlt(t, std::vector<double>(200, 0.0)), std::vector<double>(12, 0.0));
    EXPECT_EQ(t, sample_fjlt(100, 0.5, 200, 12, 1.0, 4));
}

TEST(Fjlt, UnbiasedOnUnitVector) {
    std::mt19937_64 gen(35);
    const auto x = unit(64, gen);
    std::vector<double> samples;
    for (std::uint64_t s = 0; s < 10'000; ++s) {
        samples.push_back(oracle::squared_norm(apply_fjlt(sample_fjlt(50, 0.5, 64, 8, 1.0, s), x)));
    }
    expect_unbiased(samples);
}

TEST(Batch, SingleColumnMatchesSinglePath) {
    std::mt19937_64 gen(36);
    const auto t = sample_composed(explicit_plan(300, 20, 128), 6);
    const auto x = gaussian(300, gen);
    const DenseMatrix e(300, 1, x);
    const auto got = apply_composed_batch(t, e, MultiplyPlan{});
    const auto want = apply_composed(t, x);
    EXPECT_LE(oracle::rel_error(std::vector<double>(got.data().begin(), got.data().end()), want), 1e-12);
}

TEST(Batch, ColumnsScaleLinearly) {
    std::mt19937_64 gen(37);
    const auto t = sample_composed(explicit_plan(128, 16, 64), 8);
    const auto x = gaussian(128, gen);
    DenseMatrix e(128, 3);
    for (std::size_t i = 0; i < 128; ++i) {
        e(i, 0) = x[i];
        e(i, 1) = 2.0 * x[i];
    }
    const auto y = apply_composed_batch(t, e, MultiplyPlan{});
    for (std::size_t i = 0; i < 16; ++i) {
        EXPECT_NEAR(y(i, 1), 2.0 * y(i, 0), 1e-12 * std::abs(y(i, 1)) + 1e-15);
        EXPECT_EQ(y(i, 2), 0.0);
    }
}

TEST(Batch, AllStrategiesMatchSinglePath) {
    std::mt19937_64 gen(38);
    const auto t = sample_composed(explicit_plan(512, 40, 200), 9);
    const auto e = oracle::random_matrix(512, 300, gen);
    for (auto strategy : {BatchStrategy::per_point, BatchStrategy::blocked_fast, BatchStrategy::naive}) {
        StageTimings timings;
        const auto y = embed(t, e, strategy, 16, &timings);
        for (std::size_t j = 0; j < e.cols(); ++j) {
            const auto want = apply_composed(t, std::vector<double>(e.col(j).begin(), e.col(j).end()));
            const std::vector<double> got(y.col(j).begin(), y.col(j).end());
            ASSERT_LE(oracle::rel_error(got, want), 1e-9) << j;
        }
        EXPECT_GE(timings.hadamard_ns, 0);
    }
}

TEST(Routing, Threshold) {
    EXPECT_EQ(route_batch(explicit_plan(1024, 16, 1024)), BatchStrategy::per_point);
    EXPECT_EQ(route_batch(explicit_plan(1024, 64, 1024)), BatchStrategy::blocked_fast);
    EXPECT_EQ(route_batch(explicit_plan(1024, 32, 1024)), BatchStrategy::per_point);
}
