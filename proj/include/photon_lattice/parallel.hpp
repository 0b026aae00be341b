#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace photon_lattice {

/// Worker count from PHOTON_LATTICE_THREADS (0 or unset: hardware
/// parallelism), unless overridden by set_worker_count.
unsigned worker_count();

/// 0 restores the environment-derived default.
void set_worker_count(unsigned n);

namespace detail {
bool& inside_worker();
}

/// Runs fn(i) for i in [0, count) on the worker pool and returns the results
/// in index order. Calls made from inside a worker run serially, so nested
/// fan-outs never oversubscribe. The first exception thrown by any task is
/// rethrown after all workers have joined.
template <typename Fn>
auto parallel_map(std::size_t count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
    using Result = std::invoke_result_t<Fn&, std::size_t>;
    std::vector<Result> results(count);
    const unsigned workers = detail::inside_worker() ? 1u : std::min<unsigned>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        detail::inside_worker() = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) break;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
        detail::inside_worker() = false;
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace photon_lattice
