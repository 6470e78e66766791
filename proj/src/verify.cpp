#include "fjl/verify.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/beta.hpp>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "fjl/error.hpp"
#include "fjl/rng.hpp"

namespace fjl {
namespace {

std::vector<double> squared_column_norms(const DenseMatrix& a) {
    std::vector<double> out(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (double v : a.col(j)) s += v * v;
        out[j] = s;
    }
    return out;
}

double max_deviation(const std::vector<double>& ratios) {
    double worst = 0.0;
    for (double r : ratios) worst = std::max(worst, std::abs(r - 1.0));
    return worst;
}

}  // namespace

DistortionReport distortion_report(const DenseMatrix& points, const DenseMatrix& embedded,
                                   double epsilon) {
    if (points.cols() != embedded.cols()) {
        throw DimensionError("embedding has " + std::to_string(embedded.cols()) +
                             " columns, point set has " + std::to_string(points.cols()));
    }
    const auto before = squared_column_norms(points);
    const auto after = squared_column_norms(embedded);
    DistortionReport report;
    report.epsilon_target = epsilon;
    double total = 0.0;
    for (std::size_t j = 0; j < before.size(); ++j) {
        if (before[j] == 0.0) {
            ++report.zero_columns_skipped;
            continue;
        }
        const double ratio = after[j] / before[j];
        report.per_point_ratio.push_back(ratio);
        const double dev = std::abs(ratio - 1.0);
        report.max_distortion = std::max(report.max_distortion, dev);
        total += dev;
    }
    if (report.per_point_ratio.empty()) {
        throw EmptyReportError("every column of the point set is zero");
    }
    report.mean_distortion = total / static_cast<double>(report.per_point_ratio.size());
    report.pass = report.max_distortion <= epsilon;
    return report;
}

DistortionReport distortion_report(const BatchApplier& apply, const DenseMatrix& points,
                                   double epsilon) {
    return distortion_report(points, apply(points), epsilon);
}

double clopper_pearson_upper(std::size_t failures, std::size_t trials, double confidence) {
    if (trials == 0) return 1.0;
    if (failures >= trials) return 1.0;
    return boost::math::ibeta_inv(static_cast<double>(failures + 1),
                                  static_cast<double>(trials - failures), confidence);
}

double clopper_pearson_lower(std::size_t failures, std::size_t trials, double confidence) {
    if (trials == 0 || failures == 0) return 0.0;
    return boost::math::ibeta_inv(static_cast<double>(failures),
                                  static_cast<double>(trials - failures + 1), 1.0 - confidence);
}

std::optional<std::size_t> max_certifiable_failures(std::size_t trials, double eta,
                                                    double confidence) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k <= trials; ++k) {
        if (clopper_pearson_upper(k, trials, confidence) > eta) break;
        best = k;
    }
    return best;
}

FailureRate failure_rate(const std::function<BatchApplier(std::uint64_t)>& sample,
                         const DenseMatrix& points, double epsilon, std::size_t trials,
                         std::uint64_t seed, std::optional<std::size_t> stop_after_failures) {
    if (trials < 1) throw DimensionError("failure_rate needs at least one trial");
    FailureRate out;
    for (std::size_t t = 0; t < trials; ++t) {
        const BatchApplier apply = sample(derive_seed(seed, "trial", t));
        const DistortionReport report = distortion_report(apply, points, epsilon);
        out.max_distortion.push_back(report.max_distortion);
        ++out.trials;
        if (!report.pass) ++out.failures;
        if (stop_after_failures && out.failures > *stop_after_failures) {
            out.stopped_early = out.trials < trials;
            break;
        }
    }
    out.rate = static_cast<double>(out.failures) / static_cast<double>(out.trials);
    out.upper_95 = clopper_pearson_upper(out.failures, out.trials);
    return out;
}

FailureRate failure_rate(const DimensionPlan& plan, const DenseMatrix& points, std::size_t trials,
                         std::uint64_t seed, const FailureRateOptions& options) {
    const BatchStrategy strategy = options.strategy.value_or(route_batch(plan));
    auto sample = [&](std::uint64_t trial_seed) -> BatchApplier {
        return [t = sample_composed(plan, trial_seed), strategy,
                cutoff = options.strassen_cutoff](const DenseMatrix& e) {
            return embed(t, e, strategy, cutoff);
        };
    };
    return failure_rate(sample, points, plan.epsilon, trials, seed, options.stop_after_failures);
}

RipReport rip_bruteforce(const DenseMatrix& phi, std::size_t k, std::uint64_t max_supports) {
    const std::size_t n = phi.cols();
    if (k == 0 || k > n) {
        throw DimensionError("sparsity k = " + std::to_string(k) + " must lie in [1, " +
                             std::to_string(n) + "]");
    }
    // C(n, k) with early exit once it passes the guard.
    long double count = 1.0L;
    for (std::size_t i = 0; i < k; ++i) {
        count = count * static_cast<long double>(n - i) / static_cast<long double>(i + 1);
        if (count > static_cast<long double>(max_supports) + 0.5L) {
            throw InstanceTooLargeError("C(" + std::to_string(n) + ", " + std::to_string(k) +
                                        ") supports exceed the guard of " +
                                        std::to_string(max_supports));
        }
    }

    // Gram matrix Phi^T Phi, symmetric.
    const std::size_t m = phi.rows();
    std::vector<double> gram(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a; b < n; ++b) {
            double s = 0.0;
            const auto ca = phi.col(a);
            const auto cb = phi.col(b);
            for (std::size_t i = 0; i < m; ++i) s += ca[i] * cb[i];
            gram[a * n + b] = s;
            gram[b * n + a] = s;
        }
    }

    RipReport report;
    report.k = k;
    std::vector<std::size_t> support(k);
    std::iota(support.begin(), support.end(), std::size_t{0});
    Eigen::MatrixXd block(k, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    for (;;) {
        for (std::size_t r = 0; r < k; ++r) {
            for (std::size_t c = 0; c < k; ++c) block(r, c) = gram[support[r] * n + support[c]];
        }
        solver.compute(block, Eigen::EigenvaluesOnly);
        const auto& ev = solver.eigenvalues();
        const double dev = std::max(std::abs(ev(k - 1) - 1.0), std::abs(1.0 - ev(0)));
        if (report.supports_checked == 0 || dev > report.delta_hat) {
            report.delta_hat = dev;
            report.worst_support = support;
        }
        ++report.supports_checked;

        // Next k-combination in lexicographic order.
        std::size_t i = k;
        while (i > 0 && support[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++support[i - 1];
        for (std::size_t j = i; j < k; ++j) support[j] = support[j - 1] + 1;
    }
    return report;
}

RipToJlReport riptojl_check(const DenseMatrix& phi, std::size_t k, const DenseMatrix& points,
                            double epsilon, double eta, std::size_t trials, std::uint64_t seed) {
    if (points.rows() != phi.cols()) {
        throw DimensionError("point dimension " + std::to_string(points.rows()) +
                             " != matrix columns " + std::to_string(phi.cols()));
    }
    RipToJlReport report;
    report.rip = rip_bruteforce(phi, k);
    report.epsilon = epsilon;
    report.eta = eta;
    report.k_required = 40.0 * std::log(4.0 * static_cast<double>(points.cols()) / eta);
    report.delta_condition = report.rip.delta_hat <= epsilon / 4.0;
    report.k_condition = static_cast<double>(k) >= report.k_required;
    report.hypothesis_met = report.delta_condition && report.k_condition;

    auto sample = [&](std::uint64_t trial_seed) -> BatchApplier {
        Rng rng(derive_seed(trial_seed, "xi"));
        SignVector xi = SignVector::sample(phi.cols(), rng);
        return [&phi, xi = std::move(xi)](const DenseMatrix& e) {
            DenseMatrix flipped(e.rows(), e.cols());
            for (std::size_t j = 0; j < e.cols(); ++j) xi.apply(e.col(j), flipped.col(j));
            return multiply_naive(phi, flipped);
        };
    };
    const FailureRate rate = failure_rate(sample, points, epsilon, trials, seed);
    report.trials = rate.trials;
    report.failures = rate.failures;
    report.failure_rate = rate.rate;
    if (report.hypothesis_met) report.verdict = rate.rate <= eta;
    return report;
}

bool composition_interval_contained(double epsilon) {
    const double third = epsilon / 3.0;
    const double lo = (1.0 - third) * (1.0 - third);
    const double hi = (1.0 + third) * (1.0 + third);
    return lo >= 1.0 - epsilon && hi <= 1.0 + epsilon;
}

CompositionReport composition_check(const CompositionConfig& config, const DenseMatrix& points,
                                    std::size_t trials, std::uint64_t seed) {
    if (points.rows() != config.N) throw DimensionError("point dimension != config.N");
    if (config.identity_inner && config.n != config.N) {
        throw DimensionError("identity inner stage needs n == N");
    }
    const std::size_t n_pad = next_power_of_two(config.N);
    if (config.m < 1 || config.n < config.m || (!config.identity_inner && config.n > n_pad)) {
        throw DimensionError("composition needs 1 <= m <= n <= N_pad");
    }
    const double third = config.epsilon / 3.0;
    const double lo = (1.0 - third) * (1.0 - third) * (1.0 - 1e-12);
    const double hi = (1.0 + third) * (1.0 + third) * (1.0 + 1e-12);
    const auto before = squared_column_norms(points);

    CompositionReport report;
    report.trials = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t ts = derive_seed(seed, "trial", t);
        DenseMatrix inner;
        if (config.identity_inner) {
            inner = points;
        } else {
            Rng xi_rng(derive_seed(ts, "xi"));
            Rng rows_rng(derive_seed(ts, "rows"));
            HadamardStage stage(config.N, SignVector::sample(n_pad, xi_rng),
                                RowSample::uniform(config.n, n_pad, rows_rng));
            inner = stage.transform_flipped(stage.flip_signs(points));
        }
        Rng g_rng(derive_seed(ts, "G"));
        const DenseSignMatrix outer = DenseSignMatrix::sample(config.m, config.n, g_rng);
        const DenseMatrix composed = multiply_naive(outer.to_dense(), inner);

        const auto mid = squared_column_norms(inner);
        const auto after = squared_column_norms(composed);
        std::vector<double> inner_ratio, outer_ratio, composed_ratio;
        for (std::size_t j = 0; j < before.size(); ++j) {
            if (before[j] == 0.0) continue;
            inner_ratio.push_back(mid[j] / before[j]);
            outer_ratio.push_back(mid[j] > 0.0 ? after[j] / mid[j] : 0.0);
            composed_ratio.push_back(after[j] / before[j]);
        }
        if (composed_ratio.empty()) throw EmptyReportError("every column of the point set is zero");

        const bool inner_ok = max_deviation(inner_ratio) <= third;
        const double outer_dev = max_deviation(outer_ratio);
        const bool outer_ok = outer_dev <= third;
        const double composed_dev = max_deviation(composed_ratio);
        report.outer_max_distortion.push_back(outer_dev);
        report.composed_max_distortion.push_back(composed_dev);
        if (!inner_ok) ++report.inner_failures;
        if (!outer_ok) ++report.outer_failures;
        if (inner_ok && outer_ok) {
            ++report.both_preserved;
            for (double c : composed_ratio) {
                if (c < lo || c > hi) ++report.interval_violations;
            }
        }
        if (composed_dev > config.epsilon) ++report.composed_failures;
    }
    report.composed_failure_rate =
        trials ? static_cast<double>(report.composed_failures) / static_cast<double>(trials) : 0.0;
    report.composed_upper_95 = clopper_pearson_upper(report.composed_failures, trials);
    return report;
}

ApproxMatmulResult approx_matmul(const DenseMatrix& a, const DenseMatrix& b,
                                 const BatchApplier& sketch) {
    if (a.cols() != b.rows()) {
        throw DimensionError("approx_matmul: A is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", B is " + std::to_string(b.rows()) +
                             "x" + std::to_string(b.cols()));
    }
    const DenseMatrix a_hat = sketch(a.transpose()).transpose();
    const DenseMatrix b_hat = sketch(b);
    if (a_hat.cols() != b_hat.rows()) throw DimensionError("sketch output dimensions disagree");

    ApproxMatmulResult out;
    out.product = multiply_naive(a_hat, b_hat);
    const DenseMatrix exact = multiply_naive(a, b);
    double err = 0.0;
    auto pe = out.product.data();
    auto ee = exact.data();
    for (std::size_t i = 0; i < pe.size(); ++i) err += (ee[i] - pe[i]) * (ee[i] - pe[i]);
    const double denom = frobenius_norm(a) * frobenius_norm(b);
    out.error_ratio = denom > 0.0 ? std::sqrt(err) / denom : 0.0;
    return out;
}

CalibrationResult calibrate_constants(const DenseMatrix& points, const CalibrationConfig& config) {
    if (config.grid.empty()) throw CalibrationError("empty calibration grid");
    const auto budget = max_certifiable_failures(config.trials, config.eta);
    if (!budget) {
        throw CalibrationError(std::to_string(config.trials) +
                               " trials cannot certify a failure rate of " +
                               std::to_string(config.eta) + " at 95% confidence");
    }
    std::vector<double> grid = config.grid;
    std::sort(grid.begin(), grid.end());

    CalibrationResult result;
    // Plans that differ only in c1/c2 but not in (m, n, saturated) share a result.
    std::map<std::tuple<std::size_t, std::size_t, bool>, CalibrationStep> seen;

    auto evaluate = [&](double c1, double c2) -> const CalibrationStep& {
        CalibrationStep step;
        step.c1 = c1;
        step.c2 = c2;
        DimensionPlan plan;
        try {
            plan = plan_dimensions(points.cols(), config.epsilon, config.eta, config.N, c1, c2,
                                   config.policy);
        } catch (const PlanningError& e) {
            step.note = e.what();
            result.steps.push_back(step);
            return result.steps.back();
        }
        step.feasible = true;
        step.m = plan.m;
        step.n = plan.n;
        const auto key = std::make_tuple(plan.m, plan.n, plan.saturated);
        if (auto it = seen.find(key); it != seen.end()) {
            step.rate = it->second.rate;
            step.pass = it->second.pass;
            step.note = "reused result of an identical plan";
        } else {
            FailureRateOptions options = config.options;
            options.stop_after_failures = *budget;
            step.rate = failure_rate(plan, points, config.trials, config.seed, options);
            step.pass = !step.rate.stopped_early && step.rate.upper_95 <= config.eta;
            seen.emplace(key, step);
        }
        result.steps.push_back(step);
        return result.steps.back();
    };

    const double c2_max = grid.back();
    std::optional<double> c1;
    for (double c : grid) {
        if (evaluate(c, c2_max).pass) {
            c1 = c;
            break;
        }
    }
    if (!c1) throw CalibrationError("no c1 on the grid reaches the target failure rate");
    for (double c : grid) {
        if (c == c2_max || evaluate(*c1, c).pass) {
            result.c1 = *c1;
            result.c2 = c;
            break;
        }
    }
    result.plan = plan_dimensions(points.cols(), config.epsilon, config.eta, config.N, result.c1,
                                  result.c2, config.policy);
    return result;
}

}  // namespace fjl
