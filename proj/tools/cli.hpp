#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fjl/transforms.hpp"

namespace fjl::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

enum class Subcommand { embed, verify, bench, calibrate, gen };
enum class TransformKind { composed, dense, fjlt, identity };
enum class StrategyChoice { automatic, per_point, blocked_fast, naive };

struct RunConfig {
    Subcommand subcommand = Subcommand::gen;
    std::optional<std::size_t> N;
    std::optional<std::size_t> p;
    double epsilon = 0.3;
    double eta = 0.05;
    std::uint64_t seed = 0;
    std::uint64_t points_seed = 1;
    TransformKind transform = TransformKind::composed;
    StrategyChoice strategy = StrategyChoice::automatic;
    std::string input;
    std::string output;
    std::string meta;
    std::string csv;
    std::string save_transform;
    double c1 = 4.0;
    double c2 = 4.0;
    double c_q = 1.0;
    std::size_t cutoff = kDefaultStrassenCutoff;
    InnerDimPolicy inner = InnerDimPolicy::saturate;
    std::optional<std::size_t> m;
    std::optional<std::size_t> n;
    std::size_t trials = 100;
    std::string distribution = "gaussian";
    std::size_t threads = 0;
    // bench
    std::vector<std::size_t> bench_p;
    std::vector<std::string> bench_strategies{"per_point", "blocked_fast"};
    std::size_t warmup = 1;
    std::size_t reps = 5;
    // calibrate
    std::vector<double> grid{1, 2, 4, 6, 8, 12, 16};
};

struct BenchRow {
    std::size_t N, p, m, n;
    std::string strategy;
    std::string stage;  // M1, M2, M3, total
    std::int64_t wall_ns;
    std::uint64_t flop_estimate;
};

inline constexpr const char* kBenchCsvHeader = "N,p,m,n,strategy,stage,wall_ns,flop_estimate";

/// Median-of-reps stage timings for every (p, strategy) pair of the config.
std::vector<BenchRow> run_benchmark(const RunConfig& config);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// Parses argv-style arguments (without the program name) and runs the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_gen(const RunConfig& config, std::ostream& out);
int cmd_embed(const RunConfig& config, std::ostream& out);
int cmd_verify(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, std::ostream& out);
int cmd_calibrate(const RunConfig& config, std::ostream& out);

}  // namespace fjl::cli
