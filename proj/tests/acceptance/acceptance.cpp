// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are pinned below.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fjl/dataset.hpp"
#include "fjl/error.hpp"
#include "fjl/fast_multiply.hpp"
#include "fjl/hadamard.hpp"
#include "fjl/rng.hpp"
#include "fjl/transforms.hpp"
#include "fjl/verify.hpp"

using namespace fjl;

namespace {

constexpr double kFloatKernelTol = 1e-12;
constexpr double kMultiplyTol = 1e-9;
constexpr double kBatchTol = 1e-9;
constexpr double kUnbiasedSigmas = 3.0;
constexpr double kRipOracleTol = 1e-10;
constexpr double kLinearScalingFactor = 2.0;
constexpr double kMinSpeedup = 1.0;

constexpr double kEpsilon = 0.3;
constexpr double kEta = 0.05;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double rel_error(std::span<const double> got, std::span<const double> want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
    std::normal_distribution<double> dist;
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = dist(gen);
    return m;
}

std::vector<double> unit_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist;
    std::vector<double> x(n);
    double sq = 0.0;
    for (double& v : x) {
        v = dist(gen);
        sq += v * v;
    }
    for (double& v : x) v /= std::sqrt(sq);
    return x;
}

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// C1 ---------------------------------------------------------------------

Outcome kernel_exactness() {
    std::mt19937_64 gen(101);
    std::size_t integer_mismatches = 0;
    double worst_float = 0.0;
    std::size_t cases = 0;
    for (std::size_t n : {std::size_t{1} << 4, std::size_t{1} << 10, std::size_t{1} << 16}) {
        std::uniform_int_distribution<int> ints(-1000, 1000);
        std::normal_distribution<double> reals;
        for (int c = 0; c < 1000; ++c, ++cases) {
            const std::size_t count = 1 + gen() % std::min<std::size_t>(n, 128);
            std::vector<std::uint32_t> idx(count);
            for (auto& i : idx) i = static_cast<std::uint32_t>(gen() % n);
            const RowSample rows(idx, n);

            std::vector<double> xi(n), xf(n);
            for (double& v : xi) v = ints(gen);
            for (double& v : xf) v = reals(gen);

            const auto full_i = fwht_full(xi);
            const auto trim_i = fwht_trimmed(xi, rows);
            for (std::size_t j = 0; j < count; ++j) integer_mismatches += trim_i[j] != full_i[idx[j]];

            const auto full_f = fwht_full(xf);
            const auto trim_f = fwht_trimmed(xf, rows);
            std::vector<double> want(count);
            for (std::size_t j = 0; j < count; ++j) want[j] = full_f[idx[j]];
            worst_float = std::max(worst_float, rel_error(trim_f, want));
        }
    }
    return {integer_mismatches == 0 && worst_float <= kFloatKernelTol,
            fmt("%zu cases, integer mismatches %zu, worst float rel error %.3g (tol %.0e)", cases,
                integer_mismatches, worst_float, kFloatKernelTol)};
}

// C2 ---------------------------------------------------------------------

Outcome trimmed_cost_bound() {
    std::mt19937_64 gen(202);
    std::size_t checked = 0, violations = 0, instrumented_mismatch = 0;
    double worst_ratio = 0.0;
    for (unsigned k = 0; k <= 20; ++k) {
        const std::size_t n = std::size_t{1} << k;
        for (std::size_t count : {1u, 2u, 3u, 16u, 100u, 1000u, 5000u}) {
            std::vector<std::uint32_t> idx(count);
            for (auto& i : idx) i = static_cast<std::uint32_t>(gen() % n);
            const RowSample rows(idx, n);
            const std::uint64_t ops = fwht_op_count(n, rows);
            const double bound = TrimmedHadamard::kCostConstant * static_cast<double>(n) *
                                 (std::log2(static_cast<double>(rows.distinct_count())) + 1.0);
            worst_ratio = std::max(worst_ratio, static_cast<double>(ops) / bound);
            violations += static_cast<double>(ops) > bound;
            ++checked;
            if (k >= 18 && (count == 3 || count == 1000)) {
                // Count the additions actually executed on real data.
                const TrimmedHadamard t(rows);
                std::vector<double> x(n, 1.0), out(count), scratch(t.scratch_size());
                std::uint64_t executed = 0;
                t.apply(x, out, scratch, &executed);
                instrumented_mismatch += executed != ops;
            }
        }
    }
    return {violations == 0 && instrumented_mismatch == 0,
            fmt("C = %.1f, %zu shapes up to N = 2^20, violations %zu, worst count/bound %.3f, "
                "instrumented mismatches %zu",
                TrimmedHadamard::kCostConstant, checked, violations, worst_ratio, instrumented_mismatch)};
}

// C3 ---------------------------------------------------------------------

Outcome multiply_equivalence() {
    std::mt19937_64 gen(303);
    double worst = 0.0;
    const std::size_t cutoffs[] = {8, 16, 32, 64};
    for (int s = 0; s < 200; ++s) {
        const std::size_t m = 1 + gen() % 256;
        const std::size_t n = 1 + gen() % 256;
        const std::size_t p = 1 + gen() % 4096;
        const auto g = gaussian_matrix(m, n, gen);
        const auto m2 = gaussian_matrix(n, p, gen);
        MultiplyPlan plan;
        plan.strassen_cutoff = cutoffs[gen() % 4];
        worst = std::max(worst, relative_frobenius_error(multiply_blocked(g, m2, plan), multiply_naive(g, m2)));
    }
    return {worst <= kMultiplyTol,
            fmt("200 shapes (m, n <= 256, p <= 4096), worst rel Frobenius %.3g (tol %.0e)", worst, kMultiplyTol)};
}

// C4 ---------------------------------------------------------------------

Outcome batch_single_agreement() {
    const std::size_t N = 1024, p = 500;
    const auto points = generate_points(N, p, 404);
    const DimensionPlan plans[] = {
        plan_dimensions(p, kEpsilon, kEta, N, 4, 4, InnerDimPolicy::saturate),
        explicit_plan(N, 64, 512, kEpsilon, kEta),
    };
    double worst = 0.0;
    for (const auto& plan : plans) {
        const auto t = sample_composed(plan, 405);
        for (auto strategy : {BatchStrategy::per_point, BatchStrategy::blocked_fast}) {
            const auto batch = embed(t, points, strategy);
            for (std::size_t j = 0; j < p; ++j) {
                const auto single = apply_composed(t, points.col(j));
                worst = std::max(worst, rel_error(batch.col(j), single));
            }
        }
    }
    return {worst <= kBatchTol,
            fmt("N = 1024, p = 500, per_point and blocked_fast, saturated m = %zu and trimmed m = 64, "
                "n = 512; worst column rel error %.3g (tol %.0e)",
                plans[0].m, worst, kBatchTol)};
}

// C5 ---------------------------------------------------------------------

struct JlResult {
    Outcome outcome;
    std::optional<CalibrationResult> calibration;
};

JlResult jl_property() {
    const std::size_t N = 1024, p = 2000, trials = 300;
    const auto points = generate_points(N, p, 505);
    CalibrationConfig config;
    config.N = N;
    config.epsilon = kEpsilon;
    config.eta = kEta;
    config.trials = trials;
    config.seed = 506;
    config.policy = InnerDimPolicy::saturate;
    JlResult out;
    try {
        out.calibration = calibrate_constants(points, config);
    } catch (const CalibrationError& e) {
        out.outcome = {false, std::string("calibration failed: ") + e.what()};
        return out;
    }
    const auto& cal = *out.calibration;
    // Fresh trial seeds, disjoint from the calibration run.
    const FailureRate rate = failure_rate(cal.plan, points, trials, 507);
    double worst = 0.0;
    for (double d : rate.max_distortion) worst = std::max(worst, d);
    out.outcome = {rate.upper_95 <= kEta,
                   fmt("calibrated c1 = %g, c2 = %g (m = %zu, n = %zu%s); validation %zu/%zu failures, "
                       "rate %.4f, 95%% upper %.4f (target %.2f), worst distortion %.4f",
                       cal.c1, cal.c2, cal.plan.m, cal.plan.n, cal.plan.saturated ? ", saturated" : "",
                       rate.failures, rate.trials, rate.rate, rate.upper_95, kEta, worst)};
    return out;
}

// C6 ---------------------------------------------------------------------

struct MeanCheck {
    double mean;
    double se;
    bool pass;
};

MeanCheck mean_within_sigmas(const std::function<double(std::uint64_t)>& sample, std::size_t count) {
    std::vector<double> xs(count);
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += xs[i] = sample(i);
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(count - 1);
    const double se = std::sqrt(var / static_cast<double>(count));
    return {mean, se, std::abs(mean - 1.0) <= kUnbiasedSigmas * se};
}

Outcome unbiasedness() {
    const std::size_t N = 1000, samples = 10'000;
    const auto x = unit_vector(N, 606);
    const auto plan = explicit_plan(N, 32, 256, kEpsilon, kEta);
    const auto composed = mean_within_sigmas(
        [&](std::uint64_t s) { return squared_norm(apply_composed(sample_composed(plan, derive_seed(607, "trial", s)), x)); },
        samples);
    const auto dense = mean_within_sigmas(
        [&](std::uint64_t s) { return squared_norm(sample_dense_baseline(32, N, derive_seed(608, "trial", s)).apply(x)); },
        samples);
    const auto fjlt = mean_within_sigmas(
        [&](std::uint64_t s) {
            return squared_norm(apply_fjlt(sample_fjlt(100, kEpsilon, N, 32, 1.0, derive_seed(609, "trial", s)), x));
        },
        samples);
    return {composed.pass && dense.pass && fjlt.pass,
            fmt("10^4 samples, N = 1000, m = 32: composed %.4f +- %.4f, dense %.4f +- %.4f, fjlt %.4f +- %.4f "
                "(mean +- se, |mean - 1| <= 3 se)",
                composed.mean, composed.se, dense.mean, dense.se, fjlt.mean, fjlt.se)};
}

// C7 ---------------------------------------------------------------------

Outcome composition_bound() {
    std::size_t grid_failures = 0;
    for (int i = 1; i < 1000; ++i) grid_failures += !composition_interval_contained(i / 1000.0);

    const std::size_t trials = 300;
    const auto points = generate_points(1024, 200, 707);
    const CompositionConfig config{1024, 1024, 400, 0.5, kEta, false};
    const auto r = composition_check(config, points, trials, 708);
    const bool union_bound = r.composed_failures <= r.inner_failures + r.outer_failures;
    return {grid_failures == 0 && r.interval_violations == 0 && union_bound && r.composed_upper_95 <= kEta,
            fmt("containment on eps in (0, 1) step 0.001: %zu failures; N = 1024, n = 1024, m = 400, "
                "eps = 0.5, p = 200: composed %zu/%zu failures, 95%% upper %.4f (target %.2f), "
                "inner %zu, outer %zu, interval violations %zu",
                grid_failures, r.composed_failures, r.trials, r.composed_upper_95, kEta, r.inner_failures,
                r.outer_failures, r.interval_violations)};
}

// C8 ---------------------------------------------------------------------

Outcome approximate_matmul(double c1, double c2, const char* source) {
    const std::size_t N = 1024, q = 64, p = 64, trials = 100;
    std::mt19937_64 gen(808);
    const auto a = gaussian_matrix(q, N, gen);
    const auto b = gaussian_matrix(N, p, gen);
    const auto plan = plan_dimensions(q + p, kEpsilon, kEta, N, c1, c2, InnerDimPolicy::saturate);
    std::size_t good = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto transform = sample_composed(plan, derive_seed(809, "trial", t));
        const auto r = approx_matmul(a, b, [&](const DenseMatrix& e) { return embed(transform, e, route_batch(plan)); });
        good += r.error_ratio <= kEpsilon;
        worst = std::max(worst, r.error_ratio);
    }
    const std::size_t needed = static_cast<std::size_t>(std::ceil((1.0 - kEta) * trials));
    return {good >= needed,
            fmt("c1 = %g (%s), m = %zu: %zu/%zu trials with ratio <= %.1f (need %zu), worst ratio %.4f", c1, source,
                plan.m, good, trials, kEpsilon, needed, worst)};
}

// C9 ---------------------------------------------------------------------

Outcome rip_toy() {
    const std::size_t N = 32, n = 16, k = 2;
    Rng xi_rng(derive_seed(909, "xi"));
    Rng rows_rng(derive_seed(909, "rows"));
    const HadamardStage stage(N, SignVector::sample(N, xi_rng), RowSample::uniform(n, N, rows_rng));
    // Phi = (1/sqrt(n)) R H, i.e. the stage without its sign flip.
    DenseMatrix phi(n, N);
    for (std::size_t j = 0; j < N; ++j) {
        std::vector<double> e(N, 0.0);
        e[j] = 1.0;
        const auto col = fwht_trimmed(e, stage.rows());
        for (std::size_t i = 0; i < n; ++i) phi(i, j) = col[i] * stage.scale();
    }

    // Per-support oracle: 2x2 Gram block eigenvalues from entries of H directly.
    double oracle = 0.0;
    const auto idx = stage.rows().indices();
    auto entry = [&](std::size_t i, std::size_t j) {
        return (std::popcount(static_cast<std::uint64_t>(idx[i]) & j) % 2 ? -1.0 : 1.0) / std::sqrt(double(n));
    };
    for (std::size_t a = 0; a < N; ++a) {
        for (std::size_t b = a + 1; b < N; ++b) {
            double gaa = 0.0, gbb = 0.0, gab = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                gaa += entry(i, a) * entry(i, a);
                gbb += entry(i, b) * entry(i, b);
                gab += entry(i, a) * entry(i, b);
            }
            const double mid = 0.5 * (gaa + gbb);
            const double rad = 0.5 * std::sqrt((gaa - gbb) * (gaa - gbb) + 4.0 * gab * gab);
            oracle = std::max({oracle, std::abs(mid + rad - 1.0), std::abs(mid - rad - 1.0)});
        }
    }

    const auto points = generate_points(N, 10, 910);
    const auto report = riptojl_check(phi, k, points, kEpsilon, kEta, 200, 911);
    const double diff = std::abs(report.rip.delta_hat - oracle);
    const bool verdict_ok = report.hypothesis_met ? report.verdict.value_or(false) : !report.verdict.has_value();
    return {diff <= kRipOracleTol && verdict_ok,
            fmt("N = 32, n = m = 16, k = 2: delta_hat %.6f, oracle %.6f (|diff| %.2g, tol %.0e); "
                "delta <= eps/4: %s, k >= %.1f: %s; %s; observed failure rate %.3f",
                report.rip.delta_hat, oracle, diff, kRipOracleTol, report.delta_condition ? "yes" : "no",
                report.k_required, report.k_condition ? "yes" : "no",
                report.hypothesis_met ? (report.verdict.value_or(false) ? "verdict pass" : "verdict fail")
                                      : "hypothesis not met, no verdict",
                report.failure_rate)};
}

// C10 --------------------------------------------------------------------

struct TimedStages {
    double m1, m2, m3, total;
};

TimedStages time_embed(const ComposedTransform& t, const DenseMatrix& points, BatchStrategy strategy,
                       std::size_t reps) {
    embed(t, points, strategy);  // warmup
    std::vector<double> m1, m2, m3, total;
    for (std::size_t r = 0; r < reps; ++r) {
        StageTimings timings;
        const auto start = Clock::now();
        embed(t, points, strategy, kDefaultStrassenCutoff, &timings);
        total.push_back(seconds_since(start));
        m1.push_back(timings.sign_flip_ns * 1e-9);
        m2.push_back(timings.hadamard_ns * 1e-9);
        m3.push_back(timings.dense_ns * 1e-9);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    return {median(m1), median(m2), median(m3), median(total)};
}

Outcome performance_direction() {
    const std::size_t N = 4096, m = 256, reps = 5;
    const double ln_n = std::log(static_cast<double>(N));
    const std::size_t n = std::min<std::size_t>(m * static_cast<std::size_t>(std::ceil(std::pow(ln_n, 4))), N);
    DimensionPlan plan = explicit_plan(N, m, n, kEpsilon, kEta, n == N);
    const auto t = sample_composed(plan, 1010);

    std::vector<TimedStages> blocked;
    const std::size_t ps[] = {2048, 4096, 8192};
    for (std::size_t p : ps) blocked.push_back(time_embed(t, generate_points(N, p, 1011), BatchStrategy::blocked_fast, reps));
    const auto per_point = time_embed(t, generate_points(N, 8192, 1011), BatchStrategy::per_point, reps);
    const double speedup = per_point.total / blocked[2].total;

    // Time per point of each stage across p; max over min must stay within the factor.
    double worst_spread = 0.0;
    for (auto stage : {&TimedStages::m1, &TimedStages::m2, &TimedStages::m3}) {
        double lo = 1e300, hi = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double per = blocked[i].*stage / static_cast<double>(ps[i]);
            lo = std::min(lo, per);
            hi = std::max(hi, per);
        }
        worst_spread = std::max(worst_spread, hi / lo);
    }
    return {speedup >= kMinSpeedup && worst_spread <= kLinearScalingFactor,
            fmt("N = 4096, m = 256, n = %zu, p = 8192: per_point %.3fs vs blocked_fast %.3fs, speedup %.2f "
                "(need >= %.1f); blocked stage time per point spread across p = 2048/4096/8192 is %.2fx "
                "(need <= %.1f); M1/M2/M3 at p = 8192: %.3f/%.3f/%.3fs",
                n, per_point.total, blocked[2].total, speedup, kMinSpeedup, worst_spread, kLinearScalingFactor,
                blocked[2].m1, blocked[2].m2, blocked[2].m3)};
}

int report(int id, const char* name, const std::function<Outcome()>& check) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [PRIMARY] C%d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
    return o.pass ? 0 : 1;
}

}  // namespace

int main() {
    int failed = 0;
    failed += report(1, "kernel exactness", kernel_exactness);
    failed += report(2, "trimmed cost bound", trimmed_cost_bound);
    failed += report(3, "fast multiply equivalence", multiply_equivalence);
    failed += report(4, "batch/single agreement", batch_single_agreement);

    std::optional<CalibrationResult> calibration;
    failed += report(5, "JL property", [&] {
        auto r = jl_property();
        calibration = r.calibration;
        return r.outcome;
    });
    failed += report(6, "unbiasedness", unbiasedness);
    failed += report(7, "composition", composition_bound);
    failed += report(8, "approximate matmul", [&] {
        if (calibration) return approximate_matmul(calibration->c1, calibration->c2, "calibrated");
        return approximate_matmul(16, 16, "grid maximum, calibration unavailable");
    });
    failed += report(9, "RIP toy check", rip_toy);
    failed += report(10, "performance direction", performance_direction);

    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
