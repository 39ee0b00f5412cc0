#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace skewmu {

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
/// The first exception thrown by a worker is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace skewmu
