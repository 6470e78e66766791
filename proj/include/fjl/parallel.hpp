#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace fjl {

/// Number of worker threads used by batch operations. 0 and 1 both mean serial.
/// Initialised from FJL_THREADS when set.
std::size_t thread_count() noexcept;
void set_thread_count(std::size_t threads) noexcept;

/// Run body(i) for i in [begin, end) split into contiguous chunks, one per thread.
/// Results must not depend on the split: callers write to disjoint outputs only.
template <typename Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body) {
    const std::size_t count = end > begin ? end - begin : 0;
    const std::size_t threads = std::min(std::max<std::size_t>(thread_count(), 1), count);
    if (threads <= 1) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = begin + t * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
}

}  // namespace fjl
