// SPDX-License-Identifier: MIT
/// @file parallel.hpp
/// @brief Small helper pool for embarrassingly parallel runs (ladder levels,
///        parameter-matrix cells). SOLVER_THREADS caps the pool.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace frontfix {

inline unsigned solver_thread_cap() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SOLVER_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
    }
    return hw;
}

/// Run tasks[0..n) on up to solver_thread_cap() threads. Tasks must be
/// independent; exceptions propagate from the first failing task.
inline void run_parallel(std::vector<std::function<void()>> tasks) {
    const unsigned cap = std::min<unsigned>(solver_thread_cap(), tasks.size());
    if (cap <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < cap; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                try {
                    tasks[i]();
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace frontfix
