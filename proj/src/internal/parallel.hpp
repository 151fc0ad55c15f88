// parallel.hpp: index-parallel task loop with deterministic error reporting

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mqmed::internal {

// Calls fn(i) for i in [0, n) on up to `workers` threads. Each task writes only its own
// slot, so results are independent of scheduling. If tasks throw, the exception of the
// lowest index is rethrown after every thread has joined.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn)
{
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::atomic<std::size_t>& next) {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::atomic<std::size_t> next{0};
    if (workers <= 1 || n <= 1) {
        run(next);
    } else {
        std::vector<std::thread> pool;
        const std::size_t count = workers < n ? workers : n;
        pool.reserve(count);
        for (std::size_t w = 0; w < count; ++w) pool.emplace_back([&] { run(next); });
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mqmed::internal
