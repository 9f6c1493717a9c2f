#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace dirac {

/// Thread budget for an operator call. Results never depend on it.
struct Exec {
    unsigned threads = 1;

    static Exec sequential() { return Exec{1}; }

    /// Hardware concurrency, capped by DIRAC_THREADS when set.
    static Exec from_env() {
        unsigned n = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("DIRAC_THREADS")) {
            try {
                const long cap = std::stol(env);
                if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
            } catch (const std::exception&) {
                // unparsable value: keep the hardware default
            }
        }
        return Exec{n};
    }
};

/// Calls fn(begin, end) on contiguous chunks of [0, count). Chunks are fixed
/// by (count, threads) alone; fn must only write state owned by its chunk.
template <class Fn>
void parallel_for(const Exec& exec, std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, exec.threads), count);
    if (workers <= 1) {
        if (count > 0) fn(std::size_t{0}, count);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t base = count / workers, extra = count % workers;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t end = begin + base + (w < extra ? 1 : 0);
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
        begin = end;
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace dirac
