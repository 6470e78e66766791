#include "fjl/hadamard.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "fjl/error.hpp"
#include "fjl/rng.hpp"

namespace fjl {

std::size_t next_power_of_two(std::size_t n) noexcept {
    return n <= 1 ? 1 : std::bit_ceil(n);
}

unsigned log2_floor(std::size_t n) noexcept {
    return static_cast<unsigned>(std::bit_width(n) - 1);
}

HadamardDim::HadamardDim(std::size_t size) : size_(size), log2_(0) {
    if (!is_power_of_two(size)) {
        throw DimensionError("Hadamard length " + std::to_string(size) +
                             " is not a power of two");
    }
    log2_ = log2_floor(size);
}

RowSample::RowSample(std::vector<std::uint32_t> indices, std::size_t dimension)
    : indices_(std::move(indices)), dimension_(dimension) {
    if (indices_.empty()) throw DimensionError("row sample must not be empty");
    for (auto i : indices_) {
        if (i >= dimension_) {
            throw DimensionError("row index " + std::to_string(i) + " out of range [0, " +
                                 std::to_string(dimension_) + ")");
        }
    }
}

RowSample RowSample::uniform(std::size_t count, std::size_t dimension, Rng& rng) {
    std::vector<std::uint32_t> idx(count);
    for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(dimension));
    return RowSample(std::move(idx), dimension);
}

RowSample RowSample::all(std::size_t dimension) {
    std::vector<std::uint32_t> idx(dimension);
    for (std::size_t i = 0; i < dimension; ++i) idx[i] = static_cast<std::uint32_t>(i);
    return RowSample(std::move(idx), dimension);
}

std::size_t RowSample::distinct_count() const {
    std::vector<std::uint32_t> sorted(indices_);
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

bool RowSample::is_identity() const noexcept {
    if (indices_.size() != dimension_) return false;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] != i) return false;
    }
    return true;
}

void fwht_inplace(std::span<double> x) {
    const std::size_t n = HadamardDim(x.size()).size();
    double* data = x.data();
    for (std::size_t h = n / 2; h >= 1; h /= 2) {
        for (std::size_t block = 0; block < n; block += 2 * h) {
            double* lo = data + block;
            double* hi = lo + h;
            for (std::size_t i = 0; i < h; ++i) {
                const double a = lo[i];
                const double b = hi[i];
                lo[i] = a + b;
                hi[i] = a - b;
            }
        }
    }
}

std::vector<double> fwht_full(std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    fwht_inplace(y);
    return y;
}

TrimmedHadamard::TrimmedHadamard(const RowSample& rows)
    : dim_(HadamardDim(rows.dimension()).size()), out_size_(rows.size()) {
    requests_.reserve(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        requests_.push_back({rows.indices()[j], static_cast<std::uint32_t>(j)});
    }
    // Ascending order groups requests by top bit, then by the next bit, and so on,
    // so every recursion level splits its range with one partition point.
    std::stable_sort(requests_.begin(), requests_.end(),
                     [](Request a, Request b) { return a.index < b.index; });
    recurse<false>(nullptr, dim_, requests_.data(), requests_.data() + requests_.size(), nullptr,
                   nullptr, &op_count_);
}

template <bool Compute>
void TrimmedHadamard::recurse(const double* x, std::size_t len, const Request* first,
                              const Request* last, double* scratch, double* out,
                              std::uint64_t* ops) const {
    if (len == 1) {
        if constexpr (Compute) {
            for (const Request* r = first; r != last; ++r) out[r->position] = x[0];
        }
        return;
    }
    const std::size_t half = len / 2;
    const Request* mid =
        std::partition_point(first, last, [half](Request r) { return (r.index & half) == 0; });
    if (first != mid) {
        if constexpr (Compute) {
            for (std::size_t i = 0; i < half; ++i) scratch[i] = x[i] + x[i + half];
        }
        if (ops) *ops += half;
        recurse<Compute>(scratch, half, first, mid, Compute ? scratch + half : nullptr, out, ops);
    }
    if (mid != last) {
        if constexpr (Compute) {
            for (std::size_t i = 0; i < half; ++i) scratch[i] = x[i] - x[i + half];
        }
        if (ops) *ops += half;
        recurse<Compute>(scratch, half, mid, last, Compute ? scratch + half : nullptr, out, ops);
    }
}

void TrimmedHadamard::apply(std::span<const double> x, std::span<double> out,
                            std::span<double> scratch, std::uint64_t* ops) const {
    if (x.size() != dim_) {
        throw DimensionError("trimmed Hadamard input length " + std::to_string(x.size()) +
                             " != " + std::to_string(dim_));
    }
    if (out.size() != out_size_) throw DimensionError("trimmed Hadamard output length mismatch");
    if (scratch.size() < scratch_size()) throw DimensionError("trimmed Hadamard scratch too small");
    recurse<true>(x.data(), dim_, requests_.data(), requests_.data() + requests_.size(),
                  scratch.data(), out.data(), ops);
}

std::vector<double> TrimmedHadamard::apply(std::span<const double> x) const {
    std::vector<double> out(out_size_);
    std::vector<double> scratch(scratch_size());
    apply(x, out, scratch);
    return out;
}

std::vector<double> fwht_trimmed(std::span<const double> x, const RowSample& rows) {
    return TrimmedHadamard(rows).apply(x);
}

std::uint64_t fwht_op_count(std::size_t dimension, const RowSample& rows) {
    if (dimension != rows.dimension()) {
        throw DimensionError("row sample drawn for dimension " + std::to_string(rows.dimension()) +
                             ", not " + std::to_string(dimension));
    }
    return TrimmedHadamard(rows).op_count();
}

}  // namespace fjl
