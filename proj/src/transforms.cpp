#include "fjl/transforms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>

#include "fjl/error.hpp"
#include "fjl/parallel.hpp"
#include "fjl/rng.hpp"

namespace fjl {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

void require_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                             ", got " + std::to_string(got));
    }
}

std::string describe(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// y = A x for a column-major A.
void matvec(const DenseMatrix& a, std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const double xk = x[k];
        const double* col = a.col(k).data();
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += col[i] * xk;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SignVector / DenseSignMatrix

SignVector::SignVector(std::vector<std::int8_t> signs) : signs_(std::move(signs)) {
    if (signs_.empty()) throw DimensionError("sign vector must not be empty");
    for (auto s : signs_) {
        if (s != 1 && s != -1) throw DimensionError("sign vector entries must be +1 or -1");
    }
}

SignVector SignVector::sample(std::size_t size, Rng& rng) {
    std::vector<std::int8_t> s(size);
    rng.fill_signs(s);
    return SignVector(std::move(s));
}

void SignVector::apply(std::span<const double> x, std::span<double> out) const {
    if (x.size() > signs_.size() || out.size() != signs_.size()) {
        throw DimensionError("sign vector length mismatch");
    }
    std::size_t i = 0;
    for (; i < x.size(); ++i) out[i] = signs_[i] * x[i];
    for (; i < out.size(); ++i) out[i] = 0.0;
}

DenseSignMatrix::DenseSignMatrix(std::size_t rows, std::size_t cols,
                                 std::vector<std::int8_t> signs)
    : rows_(rows), cols_(cols), signs_(std::move(signs)),
      scale_(1.0 / std::sqrt(static_cast<double>(rows))) {
    if (rows == 0 || cols == 0) throw DimensionError("sign matrix dimensions must be positive");
    require_length(signs_.size(), rows * cols, "sign matrix entries");
    for (auto s : signs_) {
        if (s != 1 && s != -1) throw DimensionError("sign matrix entries must be +1 or -1");
    }
}

DenseSignMatrix DenseSignMatrix::sample(std::size_t rows, std::size_t cols, Rng& rng) {
    std::vector<std::int8_t> s(rows * cols);
    rng.fill_signs(s);
    return DenseSignMatrix(rows, cols, std::move(s));
}

DenseMatrix DenseSignMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    auto out = d.data();
    for (std::size_t i = 0; i < signs_.size(); ++i) out[i] = signs_[i] * scale_;
    return d;
}

std::vector<double> DenseSignMatrix::apply(std::span<const double> x) const {
    require_length(x.size(), cols_, "sign matrix apply");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t k = 0; k < cols_; ++k) {
        const std::int8_t* col = signs_.data() + k * rows_;
        const double xk = x[k];
        for (std::size_t i = 0; i < rows_; ++i) y[i] += col[i] * xk;
    }
    for (auto& v : y) v *= scale_;
    return y;
}

// ---------------------------------------------------------------------------
// Planning

DimensionPlan plan_dimensions(std::size_t p, double epsilon, double eta, std::size_t N, double c1,
                              double c2, InnerDimPolicy policy) {
    if (p < 1) throw PlanningError("p must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw PlanningError("epsilon must lie in (0, 1)");
    if (!(eta > 0.0 && eta < 0.5)) throw PlanningError("eta must lie in (0, 1/2)");
    if (N < 2) throw PlanningError("N must be >= 2");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw PlanningError("c1 and c2 must be positive");

    DimensionPlan plan;
    plan.p = p;
    plan.epsilon = epsilon;
    plan.eta = eta;
    plan.N = N;
    plan.c1 = c1;
    plan.c2 = c2;
    plan.N_pad = next_power_of_two(N);

    const double base = std::log(static_cast<double>(p) / eta) / (epsilon * epsilon);
    const double log_n = std::log(static_cast<double>(N));
    const double m_real = std::ceil(c1 * base);
    const double n_real = std::ceil(c2 * base * log_n * log_n * log_n * log_n);
    const double pad = static_cast<double>(plan.N_pad);

    if (m_real > pad) {
        throw PlanningError("m = " + describe(m_real) + " exceeds N_pad = " +
                            std::to_string(plan.N_pad) + " (m <= n <= N_pad violated)");
    }
    plan.m = static_cast<std::size_t>(m_real);
    if (n_real > pad) {
        if (policy == InnerDimPolicy::strict) {
            throw PlanningError("n = " + describe(n_real) + " exceeds N_pad = " +
                                std::to_string(plan.N_pad) + " (n <= N_pad violated)");
        }
        plan.n = plan.N_pad;
        plan.saturated = true;
    } else {
        plan.n = static_cast<std::size_t>(n_real);
    }
    if (plan.m > plan.n) {
        throw PlanningError("m = " + std::to_string(plan.m) + " exceeds n = " +
                            std::to_string(plan.n) + " (m <= n violated)");
    }
    return plan;
}

DimensionPlan explicit_plan(std::size_t N, std::size_t m, std::size_t n, double epsilon,
                            double eta, bool saturated) {
    if (N < 1) throw PlanningError("N must be >= 1");
    DimensionPlan plan;
    plan.epsilon = epsilon;
    plan.eta = eta;
    plan.N = N;
    plan.N_pad = next_power_of_two(N);
    plan.m = m;
    plan.n = n;
    plan.saturated = saturated;
    if (m < 1 || m > n || n > plan.N_pad) {
        throw PlanningError("explicit plan violates 1 <= m <= n <= N_pad (m = " +
                            std::to_string(m) + ", n = " + std::to_string(n) +
                            ", N_pad = " + std::to_string(plan.N_pad) + ")");
    }
    if (saturated && n != plan.N_pad) throw PlanningError("a saturated plan needs n == N_pad");
    return plan;
}

// ---------------------------------------------------------------------------
// HadamardStage

HadamardStage::HadamardStage(std::size_t input_dim, SignVector xi, RowSample rows)
    : input_dim_(input_dim),
      xi_(std::move(xi)),
      rows_(std::move(rows)),
      trimmed_(rows_),
      full_(rows_.is_identity()),
      scale_(1.0 / std::sqrt(static_cast<double>(rows_.size()))) {
    if (!is_power_of_two(xi_.size())) throw DimensionError("stage dimension must be a power of two");
    if (input_dim_ < 1 || input_dim_ > xi_.size()) {
        throw DimensionError("stage input dimension exceeds padded dimension");
    }
    require_length(rows_.dimension(), xi_.size(), "row sample dimension");
}

void HadamardStage::transform_column(std::span<const double> flipped, std::span<double> out,
                                     std::span<double> scratch) const {
    if (full_) {
        std::copy(flipped.begin(), flipped.end(), out.begin());
        fwht_inplace(out);
    } else {
        trimmed_.apply(flipped, out, scratch);
    }
    for (auto& v : out) v *= scale_;
}

std::vector<double> HadamardStage::apply(std::span<const double> x) const {
    require_length(x.size(), input_dim_, "Hadamard stage input");
    std::vector<double> flipped(padded_dim());
    xi_.apply(x, flipped);
    std::vector<double> out(output_dim());
    std::vector<double> scratch(trimmed_.scratch_size());
    transform_column(flipped, out, scratch);
    return out;
}

DenseMatrix HadamardStage::flip_signs(const DenseMatrix& points) const {
    require_length(points.rows(), input_dim_, "point dimension");
    DenseMatrix flipped(padded_dim(), points.cols());
    parallel_for(0, points.cols(), [&](std::size_t j) { xi_.apply(points.col(j), flipped.col(j)); });
    return flipped;
}

DenseMatrix HadamardStage::transform_flipped(const DenseMatrix& flipped) const {
    require_length(flipped.rows(), padded_dim(), "sign-flipped point dimension");
    DenseMatrix out(output_dim(), flipped.cols());
    parallel_for(0, flipped.cols(), [&](std::size_t j) {
        thread_local std::vector<double> scratch;
        scratch.resize(trimmed_.scratch_size());
        transform_column(flipped.col(j), out.col(j), scratch);
    });
    return out;
}

std::uint64_t HadamardStage::op_count() const noexcept {
    if (full_) return static_cast<std::uint64_t>(padded_dim()) * log2_floor(padded_dim());
    return trimmed_.op_count();
}

// ---------------------------------------------------------------------------
// Composed transform

ComposedTransform sample_composed(const DimensionPlan& plan, std::uint64_t seed) {
    if (plan.m < 1 || plan.m > plan.n || plan.n > plan.N_pad || plan.N < 1 ||
        plan.N > plan.N_pad || !is_power_of_two(plan.N_pad)) {
        throw PlanningError("infeasible plan: 1 <= m <= n <= N_pad violated");
    }
    Rng xi_rng(derive_seed(seed, "xi"));
    Rng rows_rng(derive_seed(seed, "rows"));
    Rng g_rng(derive_seed(seed, "G"));
    SignVector xi = SignVector::sample(plan.N_pad, xi_rng);
    RowSample rows = plan.saturated ? RowSample::all(plan.N_pad)
                                    : RowSample::uniform(plan.n, plan.N_pad, rows_rng);
    DenseSignMatrix g = DenseSignMatrix::sample(plan.m, plan.n, g_rng);
    return ComposedTransform{plan, seed, HadamardStage(plan.N, std::move(xi), std::move(rows)),
                             std::move(g)};
}

std::vector<double> apply_composed(const ComposedTransform& t, std::span<const double> x) {
    return t.g.apply(t.stage.apply(x));
}

DenseMatrix apply_composed_batch(const ComposedTransform& t, const DenseMatrix& points,
                                 const MultiplyPlan& plan, StageTimings* timings) {
    plan.validate();
    require_length(points.rows(), t.input_dim(), "point dimension");
    auto start = Clock::now();
    DenseMatrix m1 = t.stage.flip_signs(points);
    const auto flip_ns = elapsed_ns(start);

    start = Clock::now();
    DenseMatrix m2 = t.stage.transform_flipped(m1);
    const auto hadamard_ns = elapsed_ns(start);
    m1 = DenseMatrix();

    start = Clock::now();
    DenseMatrix m3 = multiply_blocked(t.g.to_dense(), m2, plan);
    const auto dense_ns = elapsed_ns(start);

    if (timings) *timings = {flip_ns, hadamard_ns, dense_ns};
    return m3;
}

BatchStrategy route_batch(const DimensionPlan& plan) {
    // m <= sqrt(N_pad)  <=>  m^2 <= N_pad, exact in integers.
    const auto m = static_cast<unsigned long long>(plan.m);
    return m * m <= plan.N_pad ? BatchStrategy::per_point : BatchStrategy::blocked_fast;
}

DenseMatrix embed(const ComposedTransform& t, const DenseMatrix& points, BatchStrategy strategy,
                  std::size_t strassen_cutoff, StageTimings* timings) {
    if (strategy != BatchStrategy::per_point) {
        MultiplyPlan plan;
        plan.strategy = strategy == BatchStrategy::naive ? MultiplyStrategy::naive
                                                         : MultiplyStrategy::blocked_fast;
        plan.strassen_cutoff = strassen_cutoff;
        return apply_composed_batch(t, points, plan, timings);
    }
    require_length(points.rows(), t.input_dim(), "point dimension");
    auto start = Clock::now();
    DenseMatrix m1 = t.stage.flip_signs(points);
    const auto flip_ns = elapsed_ns(start);

    start = Clock::now();
    DenseMatrix m2 = t.stage.transform_flipped(m1);
    const auto hadamard_ns = elapsed_ns(start);
    m1 = DenseMatrix();

    start = Clock::now();
    const DenseMatrix g = t.g.to_dense();
    DenseMatrix m3(g.rows(), points.cols());
    parallel_for(0, points.cols(), [&](std::size_t j) { matvec(g, m2.col(j), m3.col(j)); });
    const auto dense_ns = elapsed_ns(start);

    if (timings) *timings = {flip_ns, hadamard_ns, dense_ns};
    return m3;
}

// ---------------------------------------------------------------------------
// Dense baseline

DenseSignMatrix sample_dense_baseline(std::size_t m, std::size_t N, std::uint64_t seed) {
    if (m < 1 || N < 1) throw PlanningError("dense baseline needs m, N >= 1");
    Rng rng(derive_seed(seed, "G"));
    return DenseSignMatrix::sample(m, N, rng);
}

DenseMatrix apply_dense_batch(const DenseSignMatrix& a, const DenseMatrix& points) {
    require_length(points.rows(), a.cols(), "point dimension");
    return multiply_naive(a.to_dense(), points);
}

// ---------------------------------------------------------------------------
// FJLT baseline

double fjlt_density(std::size_t p, std::size_t padded_dim, double c_q) {
    if (p < 1) throw PlanningError("p must be >= 1");
    if (!(c_q > 0.0)) throw PlanningError("c_q must be positive");
    if (padded_dim < 1) throw PlanningError("padded dimension must be >= 1");
    const double lp = std::log(static_cast<double>(p));
    const double floor_q = 1.0 / static_cast<double>(padded_dim);
    return std::clamp(c_q * lp * lp / static_cast<double>(padded_dim), floor_q, 1.0);
}

FjltTransform sample_fjlt(std::size_t p, double epsilon, std::size_t N, std::size_t m, double c_q,
                          std::uint64_t seed) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw PlanningError("epsilon must lie in (0, 1)");
    if (N < 1) throw PlanningError("N must be >= 1");
    FjltTransform t;
    t.m = m;
    t.input_dim = N;
    t.padded_dim = next_power_of_two(N);
    t.seed = seed;
    if (m < 1 || m > t.padded_dim) throw PlanningError("FJLT needs 1 <= m <= N_pad");
    t.q = fjlt_density(p, t.padded_dim, c_q);

    Rng xi_rng(derive_seed(seed, "fjlt.xi"));
    t.xi = SignVector::sample(t.padded_dim, xi_rng);

    // Walk the m x N_pad positions in row-major order with geometric gaps.
    Rng rng(derive_seed(seed, "fjlt.P"));
    const std::uint64_t total = static_cast<std::uint64_t>(m) * t.padded_dim;
    const double value_scale = 1.0 / std::sqrt(t.q);
    auto push = [&](std::uint64_t pos) {
        t.entries.push_back({static_cast<std::uint32_t>(pos / t.padded_dim),
                             static_cast<std::uint32_t>(pos % t.padded_dim),
                             rng.normal() * value_scale});
    };
    if (t.q >= 1.0) {
        t.entries.reserve(total);
        for (std::uint64_t pos = 0; pos < total; ++pos) push(pos);
    } else {
        const double log_miss = std::log1p(-t.q);
        std::uint64_t pos = 0;
        bool first = true;
        for (;;) {
            const double u = 1.0 - rng.uniform();  // (0, 1]
            const double gap = std::floor(std::log(u) / log_miss);
            if (gap >= static_cast<double>(total)) break;
            const std::uint64_t step = static_cast<std::uint64_t>(gap) + (first ? 0 : 1);
            if (step >= total - pos) break;
            pos += step;
            first = false;
            push(pos);
        }
    }
    return t;
}

std::vector<double> apply_fjlt(const FjltTransform& t, std::span<const double> x) {
    require_length(x.size(), t.input_dim, "FJLT input");
    std::vector<double> z(t.padded_dim);
    t.xi.apply(x, z);
    fwht_inplace(z);
    const double h_scale = 1.0 / std::sqrt(static_cast<double>(t.padded_dim));
    std::vector<double> y(t.m, 0.0);
    for (const auto& e : t.entries) y[e.row] += e.value * z[e.col];
    const double out_scale = h_scale / std::sqrt(static_cast<double>(t.m));
    for (auto& v : y) v *= out_scale;
    return y;
}

DenseMatrix apply_fjlt_batch(const FjltTransform& t, const DenseMatrix& points) {
    require_length(points.rows(), t.input_dim, "point dimension");
    DenseMatrix out(t.m, points.cols());
    parallel_for(0, points.cols(), [&](std::size_t j) {
        const auto y = apply_fjlt(t, points.col(j));
        std::copy(y.begin(), y.end(), out.col(j).begin());
    });
    return out;
}

}  // namespace fjl
