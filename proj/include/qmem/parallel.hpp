#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qmem {

// Worker count used by the sampling and time-scan loops. Zero selects the
// hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for i in [0, n). Work is split into contiguous chunks; the
// first exception thrown by any worker is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t lo = n * w / workers;
                const std::size_t hi = n * (w + 1) / workers;
                try {
                    for (std::size_t i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace qmem
