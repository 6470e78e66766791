#include "fjl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace fjl {
namespace {

std::size_t threads_from_env() {
    if (const char* env = std::getenv("FJL_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return 1;
}

std::atomic<std::size_t>& thread_setting() {
    static std::atomic<std::size_t> value{threads_from_env()};
    return value;
}

}  // namespace

std::size_t thread_count() noexcept { return thread_setting().load(); }

void set_thread_count(std::size_t threads) noexcept {
    thread_setting().store(threads == 0 ? 1 : threads);
}

}  // namespace fjl
