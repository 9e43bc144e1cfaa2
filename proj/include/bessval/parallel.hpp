#pragma once

// Fixed-size worker pool over an index range. Each index writes only its own
// output slot, so results do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bessval {

inline int default_jobs() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// (lowest index among those thrown) is rethrown after all workers stop.
template <class Fn>
void parallel_for(long n, int jobs, Fn&& fn) {
    if (n <= 0) return;
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<long>(n, 1024))));
    if (jobs == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::mutex guard;
    long failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(guard);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace bessval
