#pragma once

// On-disk formats.
//
// FJLM point set (little-endian):
//   offset 0   char[4]  "FJLM"
//   offset 4   u32      rows (N)
//   offset 8   u32      cols (p)
//   offset 12  u32      flags: bits 0-7 element type (0 = float64), rest zero
//   offset 16  f64[rows*cols] column-major entries
//
// FJL1 transform container (little-endian):
//   char[4] "FJL1", u32 version (1), u32 scheme (1 composed, 2 dense sign,
//   3 fjlt), u32 rng scheme (1 = splitmix64-tagged mt19937_64 streams),
//   u32 flags (bit 0: saturated row sample), u32 reserved (0),
//   u64 seed, u64 N_input, u64 N_pad, u64 n, u64 m, then the payload:
//     composed: i8 xi[N_pad], u32 rows[n], i8 G[m*n] (column-major)
//     dense:    i8 G[m*N_input] (column-major); N_pad = n = N_input
//     fjlt:     f64 q, u64 nnz, i8 xi[N_pad], nnz x (u32 row, u32 col, f64 value); n = 0
// The DimensionPlan travels next to it as a JSON sidecar.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fjl/dense_matrix.hpp"
#include "fjl/transforms.hpp"

namespace fjl {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kRngScheme = 1;

enum class TransformScheme : std::uint32_t { composed = 1, dense = 2, fjlt = 3 };

Bytes encode_point_set(const DenseMatrix& points);
DenseMatrix decode_point_set(const Bytes& bytes);

void write_point_set(const std::filesystem::path& path, const DenseMatrix& points);
DenseMatrix read_point_set(const std::filesystem::path& path);

/// One point per line, comma separated, full round-trip precision.
void write_point_set_csv(const std::filesystem::path& path, const DenseMatrix& points);
DenseMatrix read_point_set_csv(const std::filesystem::path& path);

Bytes encode_transform(const ComposedTransform& t);
Bytes encode_transform(const DenseSignMatrix& g, std::uint64_t seed);
Bytes encode_transform(const FjltTransform& t);

/// Scheme tag of an FJL1 container; throws FormatError on a bad header.
TransformScheme peek_scheme(const Bytes& bytes);

/// When plan is null an explicit plan is rebuilt from the stored dimensions.
ComposedTransform decode_composed(const Bytes& bytes, const DimensionPlan* plan = nullptr);
DenseSignMatrix decode_dense(const Bytes& bytes);
FjltTransform decode_fjlt(const Bytes& bytes);

Bytes read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const Bytes& bytes);

nlohmann::json plan_to_json(const DimensionPlan& plan);
DimensionPlan plan_from_json(const nlohmann::json& j);

}  // namespace fjl
