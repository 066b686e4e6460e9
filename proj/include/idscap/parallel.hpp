// Deterministic parallel map: tasks are indexed, workers pull indices from an
// atomic counter, and results land in their slot, so the output never depends
// on the schedule or the thread count.
#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace idscap {

template <typename Result>
std::vector<Result> parallel_map(std::size_t count, unsigned threads,
                                 const std::function<Result(std::size_t)>& fn) {
    std::vector<Result> results(count);
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<std::size_t>(threads, count);
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return results;
}

} // namespace idscap
