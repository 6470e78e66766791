#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fjl/dataset.hpp"
#include "fjl/error.hpp"
#include "fjl/io.hpp"
#include "fjl/parallel.hpp"
#include "fjl/verify.hpp"

namespace fjl::cli {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PointDistribution parse_distribution(const std::string& name) {
    if (name == "gaussian") return PointDistribution::gaussian;
    if (name == "sphere") return PointDistribution::sphere;
    if (name == "near-duplicates") return PointDistribution::near_duplicates;
    throw UsageError("unknown distribution '" + name + "'");
}

void validate_common(const RunConfig& c) {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
    if (!(c.eta > 0.0 && c.eta < 0.5)) throw UsageError("--eta must lie in (0, 1/2)");
    if (c.cutoff < 8) throw UsageError("--cutoff must be >= 8");
    if (!(c.c1 > 0.0) || !(c.c2 > 0.0) || !(c.c_q > 0.0)) {
        throw UsageError("--c1, --c2 and --cq must be positive");
    }
    if (c.trials < 1) throw UsageError("--trials must be >= 1");
    if (c.m && *c.m < 1) throw UsageError("--m must be >= 1");
}

DenseMatrix load_points(const std::string& path) {
    return has_suffix(path, ".csv") ? read_point_set_csv(path) : read_point_set(path);
}

void save_points(const std::string& path, const DenseMatrix& points) {
    if (has_suffix(path, ".csv")) {
        write_point_set_csv(path, points);
    } else {
        write_point_set(path, points);
    }
}

/// Points from --input, or gaussian points from --N/--p/--points-seed.
DenseMatrix obtain_points(const RunConfig& c) {
    if (!c.input.empty()) {
        DenseMatrix points = load_points(c.input);
        if (c.N && *c.N != points.rows()) {
            throw DimensionError("--N " + std::to_string(*c.N) + " does not match input with " +
                                 std::to_string(points.rows()) + " rows");
        }
        if (c.p && *c.p != points.cols()) {
            throw DimensionError("--p " + std::to_string(*c.p) + " does not match input with " +
                                 std::to_string(points.cols()) + " columns");
        }
        return points;
    }
    if (!c.N || !c.p) throw UsageError("either --input or both --N and --p are required");
    if (*c.N < 1 || *c.p < 1) throw UsageError("--N and --p must be >= 1");
    return generate_points(*c.N, *c.p, c.points_seed, parse_distribution(c.distribution));
}

DimensionPlan make_plan(const RunConfig& c, std::size_t N, std::size_t p) {
    if (c.m) {
        const std::size_t n_pad = next_power_of_two(N);
        const std::size_t n = c.n.value_or(n_pad);
        DimensionPlan plan = explicit_plan(N, *c.m, n, c.epsilon, c.eta, !c.n.has_value());
        plan.p = p;
        return plan;
    }
    return plan_dimensions(p, c.epsilon, c.eta, N, c.c1, c.c2, c.inner);
}

BatchStrategy resolve_strategy(StrategyChoice choice, const DimensionPlan& plan) {
    switch (choice) {
        case StrategyChoice::per_point: return BatchStrategy::per_point;
        case StrategyChoice::blocked_fast: return BatchStrategy::blocked_fast;
        case StrategyChoice::naive: return BatchStrategy::naive;
        case StrategyChoice::automatic: break;
    }
    return route_batch(plan);
}

const char* strategy_name(BatchStrategy s) {
    switch (s) {
        case BatchStrategy::per_point: return "per_point";
        case BatchStrategy::blocked_fast: return "blocked_fast";
        case BatchStrategy::naive: return "naive";
    }
    return "?";
}

BatchStrategy parse_strategy(const std::string& name) {
    if (name == "per_point") return BatchStrategy::per_point;
    if (name == "blocked_fast") return BatchStrategy::blocked_fast;
    if (name == "naive") return BatchStrategy::naive;
    throw UsageError("unknown strategy '" + name + "'");
}

const char* transform_name(TransformKind k) {
    switch (k) {
        case TransformKind::composed: return "composed";
        case TransformKind::dense: return "dense";
        case TransformKind::fjlt: return "fjlt";
        case TransformKind::identity: return "identity";
    }
    return "?";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path);
    out << text;
    if (!out) throw FormatError("write failed for " + path);
}

using Clock = std::chrono::steady_clock;

std::int64_t since_ns(Clock::time_point t) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t).count();
}

std::int64_t median(std::vector<std::int64_t> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

}  // namespace

int cmd_gen(const RunConfig& c, std::ostream& out) {
    if (!c.N || !c.p) throw UsageError("gen needs --N and --p");
    if (*c.N < 1 || *c.p < 1) throw UsageError("--N and --p must be >= 1");
    if (c.output.empty()) throw UsageError("gen needs --out");
    const DenseMatrix points = generate_points(*c.N, *c.p, c.seed, parse_distribution(c.distribution));
    save_points(c.output, points);
    out << "wrote " << points.rows() << "x" << points.cols() << " " << c.distribution
        << " points to " << c.output << "\n";
    return kExitPass;
}

int cmd_embed(const RunConfig& c, std::ostream& out) {
    validate_common(c);
    if (c.input.empty()) throw UsageError("embed needs --input");
    if (c.output.empty()) throw UsageError("embed needs --out");
    if (c.transform == TransformKind::identity) throw UsageError("embed does not take the identity transform");
    const DenseMatrix points = obtain_points(c);
    const DimensionPlan plan = make_plan(c, points.rows(), points.cols());

    json meta;
    meta["plan"] = plan_to_json(plan);
    meta["seed"] = c.seed;
    meta["transform"] = transform_name(c.transform);
    meta["input"] = c.input;
    meta["output"] = c.output;

    DenseMatrix embedded;
    Bytes transform_bytes;
    if (c.transform == TransformKind::composed) {
        const ComposedTransform t = sample_composed(plan, c.seed);
        const BatchStrategy strategy = resolve_strategy(c.strategy, plan);
        StageTimings timings;
        embedded = embed(t, points, strategy, c.cutoff, &timings);
        meta["strategy"] = strategy_name(strategy);
        meta["strassen_cutoff"] = c.cutoff;
        meta["timings_ns"] = {{"M1", timings.sign_flip_ns},
                              {"M2", timings.hadamard_ns},
                              {"M3", timings.dense_ns}};
        if (!c.save_transform.empty()) transform_bytes = encode_transform(t);
    } else if (c.transform == TransformKind::dense) {
        const DenseSignMatrix g = sample_dense_baseline(plan.m, points.rows(), c.seed);
        const auto start = Clock::now();
        embedded = apply_dense_batch(g, points);
        meta["timings_ns"] = {{"total", since_ns(start)}};
        if (!c.save_transform.empty()) transform_bytes = encode_transform(g, c.seed);
    } else {
        const FjltTransform t =
            sample_fjlt(points.cols(), c.epsilon, points.rows(), plan.m, c.c_q, c.seed);
        const auto start = Clock::now();
        embedded = apply_fjlt_batch(t, points);
        meta["c_q"] = c.c_q;
        meta["q"] = t.q;
        meta["timings_ns"] = {{"total", since_ns(start)}};
        if (!c.save_transform.empty()) transform_bytes = encode_transform(t);
    }

    save_points(c.output, embedded);
    write_text(c.meta.empty() ? c.output + ".json" : c.meta, meta.dump(2) + "\n");
    if (!c.save_transform.empty()) {
        write_bytes(c.save_transform, transform_bytes);
        write_text(c.save_transform + ".json", plan_to_json(plan).dump(2) + "\n");
    }
    out << "embedded " << points.cols() << " points " << points.rows() << " -> "
        << embedded.rows() << " into " << c.output << "\n";
    return kExitPass;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    validate_common(c);
    const DenseMatrix points = obtain_points(c);
    const std::size_t N = points.rows();
    const std::size_t p = points.cols();

    json report;
    report["transform"] = transform_name(c.transform);
    report["epsilon"] = c.epsilon;
    report["eta"] = c.eta;
    report["seed"] = c.seed;
    report["N"] = N;
    report["p"] = p;

    FailureRate rate;
    if (c.transform == TransformKind::composed) {
        const DimensionPlan plan = make_plan(c, N, p);
        report["plan"] = plan_to_json(plan);
        FailureRateOptions options;
        if (c.strategy != StrategyChoice::automatic) options.strategy = resolve_strategy(c.strategy, plan);
        options.strassen_cutoff = c.cutoff;
        rate = failure_rate(plan, points, c.trials, c.seed, options);
    } else if (c.transform == TransformKind::identity) {
        rate = failure_rate([](std::uint64_t) -> BatchApplier {
            return [](const DenseMatrix& e) { return e; };
        }, points, c.epsilon, c.trials, c.seed);
    } else {
        const DimensionPlan plan = make_plan(c, N, p);
        report["plan"] = plan_to_json(plan);
        const bool dense = c.transform == TransformKind::dense;
        rate = failure_rate(
            [&](std::uint64_t ts) -> BatchApplier {
                if (dense) {
                    return [g = sample_dense_baseline(plan.m, N, ts)](const DenseMatrix& e) {
                        return apply_dense_batch(g, e);
                    };
                }
                return [t = sample_fjlt(p, c.epsilon, N, plan.m, c.c_q, ts)](const DenseMatrix& e) {
                    return apply_fjlt_batch(t, e);
                };
            },
            points, c.epsilon, c.trials, c.seed);
    }

    const bool pass = rate.upper_95 <= c.eta;
    double worst = 0.0;
    for (double d : rate.max_distortion) worst = std::max(worst, d);
    report["trials"] = rate.trials;
    report["failures"] = rate.failures;
    report["failure_rate"] = rate.rate;
    report["upper_95"] = rate.upper_95;
    report["max_distortion"] = worst;
    report["pass"] = pass;

    if (!c.output.empty()) write_text(c.output, report.dump(2) + "\n");
    if (!c.csv.empty()) {
        std::ostringstream csv;
        csv << "trial,max_distortion,pass\n";
        for (std::size_t t = 0; t < rate.max_distortion.size(); ++t) {
            csv << t << ',' << rate.max_distortion[t] << ','
                << (rate.max_distortion[t] <= c.epsilon ? 1 : 0) << '\n';
        }
        write_text(c.csv, csv.str());
    }
    out << (pass ? "PASS" : "FAIL") << " " << transform_name(c.transform) << ": " << rate.failures
        << "/" << rate.trials << " trials exceeded epsilon=" << c.epsilon
        << ", 95% upper bound " << rate.upper_95 << " vs eta=" << c.eta
        << ", max distortion " << worst << "\n";
    return pass ? kExitPass : kExitFail;
}

std::vector<BenchRow> run_benchmark(const RunConfig& c) {
    if (!c.N) throw UsageError("bench needs --N");
    if (!c.m) throw UsageError("bench needs --m");
    if (c.reps < 1) throw UsageError("--reps must be >= 1");
    if (c.cutoff < 8) throw UsageError("--cutoff must be >= 8");
    std::vector<std::size_t> ps = c.bench_p;
    if (ps.empty() && c.p) ps.push_back(*c.p);
    if (ps.empty()) throw UsageError("bench needs --p or --p-list");
    std::vector<BatchStrategy> strategies;
    for (const auto& s : c.bench_strategies) strategies.push_back(parse_strategy(s));

    const std::size_t N = *c.N;
    const std::size_t n_pad = next_power_of_two(N);
    std::size_t n = n_pad;
    if (c.n) {
        n = *c.n;
    } else {
        const double ln = std::log(static_cast<double>(N));
        const double factor = std::ceil(ln * ln * ln * ln);
        if (static_cast<double>(*c.m) * factor < static_cast<double>(n_pad)) {
            n = static_cast<std::size_t>(static_cast<double>(*c.m) * factor);
        }
    }
    DimensionPlan plan = explicit_plan(N, *c.m, n, c.epsilon, c.eta, n == n_pad && !c.n);

    std::vector<BenchRow> rows;
    for (std::size_t p : ps) {
        plan.p = p;
        const DenseMatrix points = generate_points(N, p, c.points_seed);
        const ComposedTransform t = sample_composed(plan, c.seed);
        for (BatchStrategy strategy : strategies) {
            for (std::size_t w = 0; w < c.warmup; ++w) embed(t, points, strategy, c.cutoff);
            std::vector<std::int64_t> m1, m2, m3, total;
            for (std::size_t r = 0; r < c.reps; ++r) {
                StageTimings timings;
                const auto start = Clock::now();
                embed(t, points, strategy, c.cutoff, &timings);
                total.push_back(since_ns(start));
                m1.push_back(timings.sign_flip_ns);
                m2.push_back(timings.hadamard_ns);
                m3.push_back(timings.dense_ns);
            }
            MultiplyPlan mp;
            mp.strategy = strategy == BatchStrategy::blocked_fast ? MultiplyStrategy::blocked_fast
                                                                  : MultiplyStrategy::naive;
            mp.strassen_cutoff = c.cutoff;
            const std::uint64_t f1 = static_cast<std::uint64_t>(n_pad) * p;
            const std::uint64_t f2 = t.stage.op_count() * p;
            const std::uint64_t f3 = flop_estimate(plan.m, plan.n, p, mp);
            const std::string name = strategy_name(strategy);
            rows.push_back({N, p, plan.m, plan.n, name, "M1", median(m1), f1});
            rows.push_back({N, p, plan.m, plan.n, name, "M2", median(m2), f2});
            rows.push_back({N, p, plan.m, plan.n, name, "M3", median(m3), f3});
            rows.push_back({N, p, plan.m, plan.n, name, "total", median(total), f1 + f2 + f3});
        }
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << kBenchCsvHeader << "\n";
    for (const auto& r : rows) {
        os << r.N << ',' << r.p << ',' << r.m << ',' << r.n << ',' << r.strategy << ',' << r.stage
           << ',' << r.wall_ns << ',' << r.flop_estimate << "\n";
    }
    return os.str();
}

int cmd_bench(const RunConfig& c, std::ostream& out) {
    const auto rows = run_benchmark(c);
    const std::string csv = bench_csv(rows);
    if (c.output.empty()) {
        out << csv;
    } else {
        write_text(c.output, csv);
        out << "wrote " << rows.size() << " rows to " << c.output << "\n";
    }
    return kExitPass;
}

int cmd_calibrate(const RunConfig& c, std::ostream& out) {
    validate_common(c);
    if (c.grid.empty()) throw UsageError("--grid must not be empty");
    const DenseMatrix points = obtain_points(c);
    CalibrationConfig config;
    config.N = points.rows();
    config.epsilon = c.epsilon;
    config.eta = c.eta;
    config.trials = c.trials;
    config.seed = c.seed;
    config.policy = c.inner;
    config.grid = c.grid;
    config.options.strassen_cutoff = c.cutoff;

    json report;
    report["N"] = config.N;
    report["p"] = points.cols();
    report["epsilon"] = c.epsilon;
    report["eta"] = c.eta;
    report["trials"] = c.trials;
    report["seed"] = c.seed;
    report["grid"] = c.grid;
    int code = kExitPass;
    try {
        const CalibrationResult result = calibrate_constants(points, config);
        report["c1"] = result.c1;
        report["c2"] = result.c2;
        report["plan"] = plan_to_json(result.plan);
        json steps = json::array();
        for (const auto& s : result.steps) {
            steps.push_back({{"c1", s.c1}, {"c2", s.c2}, {"feasible", s.feasible},
                             {"m", s.m}, {"n", s.n}, {"trials", s.rate.trials},
                             {"failures", s.rate.failures}, {"upper_95", s.rate.upper_95},
                             {"pass", s.pass}, {"note", s.note}});
        }
        report["steps"] = steps;
        report["status"] = "ok";
        out << "recommended c1=" << result.c1 << " c2=" << result.c2 << " (m=" << result.plan.m
            << ", n=" << result.plan.n << ")\n";
    } catch (const CalibrationError& e) {
        report["status"] = "calibration-failed";
        report["error"] = e.what();
        out << "calibration-failed: " << e.what() << "\n";
        code = kExitFail;
    }
    if (!c.output.empty()) write_text(c.output, report.dump(2) + "\n");
    return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fast Johnson-Lindenstrauss embeddings: generate, embed, verify, benchmark"};
    app.require_subcommand(1);
    RunConfig c;

    std::map<std::string, TransformKind> transforms{{"composed", TransformKind::composed},
                                                    {"dense", TransformKind::dense},
                                                    {"fjlt", TransformKind::fjlt},
                                                    {"identity", TransformKind::identity}};
    std::map<std::string, StrategyChoice> strategies{{"auto", StrategyChoice::automatic},
                                                     {"per_point", StrategyChoice::per_point},
                                                     {"blocked_fast", StrategyChoice::blocked_fast},
                                                     {"naive", StrategyChoice::naive}};
    std::map<std::string, InnerDimPolicy> policies{{"strict", InnerDimPolicy::strict},
                                                   {"saturate", InnerDimPolicy::saturate}};

    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", c.threads, "Worker threads (falls back to FJL_THREADS)");
    };
    auto add_plan = [&](CLI::App* sub) {
        sub->add_option("--epsilon", c.epsilon, "Target distortion");
        sub->add_option("--eta", c.eta, "Target failure probability");
        sub->add_option("--c1", c.c1, "Constant in m");
        sub->add_option("--c2", c.c2, "Constant in n");
        sub->add_option("--m", c.m, "Force the embedding dimension m");
        sub->add_option("--n", c.n, "Force the inner dimension n (with --m)");
        sub->add_option("--inner-dim", c.inner, "strict or saturate")
            ->transform(CLI::CheckedTransformer(policies));
        sub->add_option("--cutoff", c.cutoff, "Strassen cutoff");
    };

    auto* gen = app.add_subcommand("gen", "Write a random point set");
    gen->add_option("--N", c.N, "Ambient dimension")->required();
    gen->add_option("--p", c.p, "Number of points")->required();
    gen->add_option("--seed", c.seed, "Seed");
    gen->add_option("--dist", c.distribution, "gaussian, sphere or near-duplicates");
    gen->add_option("--out", c.output, "Output path (.fjlm or .csv)")->required();

    auto* emb = app.add_subcommand("embed", "Embed a point set");
    emb->add_option("--input", c.input, "Input point set")->required();
    emb->add_option("--out", c.output, "Output path")->required();
    emb->add_option("--meta", c.meta, "Metadata JSON path (default <out>.json)");
    emb->add_option("--N", c.N, "Expected ambient dimension");
    emb->add_option("--seed", c.seed, "Transform seed");
    emb->add_option("--transform", c.transform, "composed, dense or fjlt")
        ->transform(CLI::CheckedTransformer(transforms));
    emb->add_option("--strategy", c.strategy, "auto, per_point, blocked_fast or naive")
        ->transform(CLI::CheckedTransformer(strategies));
    emb->add_option("--cq", c.c_q, "FJLT density constant");
    emb->add_option("--save-transform", c.save_transform, "Write the FJL1 transform here");
    add_plan(emb);
    add_threads(emb);

    auto* ver = app.add_subcommand("verify", "Measure the empirical failure rate");
    ver->add_option("--input", c.input, "Point set (default: gaussian from --N/--p)");
    ver->add_option("--N", c.N, "Ambient dimension");
    ver->add_option("--p", c.p, "Number of points");
    ver->add_option("--points-seed", c.points_seed, "Seed of generated points");
    ver->add_option("--dist", c.distribution, "Distribution of generated points");
    ver->add_option("--seed", c.seed, "Trial seed");
    ver->add_option("--trials", c.trials, "Number of sampled transforms");
    ver->add_option("--transform", c.transform, "composed, dense, fjlt or identity")
        ->transform(CLI::CheckedTransformer(transforms));
    ver->add_option("--strategy", c.strategy, "auto, per_point, blocked_fast or naive")
        ->transform(CLI::CheckedTransformer(strategies));
    ver->add_option("--cq", c.c_q, "FJLT density constant");
    ver->add_option("--out", c.output, "JSON report path");
    ver->add_option("--csv", c.csv, "Per-trial CSV path");
    add_plan(ver);
    add_threads(ver);

    auto* bench = app.add_subcommand("bench", "Time the pipeline stages");
    bench->add_option("--N", c.N, "Ambient dimension")->required();
    bench->add_option("--m", c.m, "Embedding dimension")->required();
    bench->add_option("--n", c.n, "Inner dimension (default m*ceil((ln N)^4) capped at N_pad)");
    bench->add_option("--p", c.p, "Number of points");
    bench->add_option("--p-list", c.bench_p, "Several point counts")->delimiter(',');
    bench->add_option("--strategies", c.bench_strategies, "per_point,blocked_fast,naive")
        ->delimiter(',');
    bench->add_option("--warmup", c.warmup, "Warmup runs");
    bench->add_option("--reps", c.reps, "Timed repetitions (median reported)");
    bench->add_option("--cutoff", c.cutoff, "Strassen cutoff");
    bench->add_option("--seed", c.seed, "Transform seed");
    bench->add_option("--points-seed", c.points_seed, "Seed of generated points");
    bench->add_option("--out", c.output, "CSV path (default stdout)");
    add_threads(bench);

    auto* cal = app.add_subcommand("calibrate", "Search the smallest c1, c2 on a grid");
    cal->add_option("--input", c.input, "Point set (default: gaussian from --N/--p)");
    cal->add_option("--N", c.N, "Ambient dimension");
    cal->add_option("--p", c.p, "Number of points");
    cal->add_option("--points-seed", c.points_seed, "Seed of generated points");
    cal->add_option("--seed", c.seed, "Trial seed");
    cal->add_option("--trials", c.trials, "Trials per candidate");
    cal->add_option("--grid", c.grid, "Candidate constants")->delimiter(',');
    cal->add_option("--out", c.output, "Recommendation JSON path");
    add_plan(cal);
    add_threads(cal);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (c.threads > 0) set_thread_count(c.threads);
    try {
        if (gen->parsed()) return cmd_gen(c, out);
        if (emb->parsed()) return cmd_embed(c, out);
        if (ver->parsed()) return cmd_verify(c, out);
        if (bench->parsed()) return cmd_bench(c, out);
        if (cal->parsed()) return cmd_calibrate(c, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const fjl::Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace fjl::cli
