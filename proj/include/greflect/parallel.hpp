#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace greflect {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> v{0};
    return v;
}
}  // namespace detail

// Worker count used by ensemble loops. 0 = hardware concurrency.
inline void set_thread_count(int n) { detail::thread_count_slot() = n; }

inline int thread_count() {
    const int v = detail::thread_count_slot();
    if (v > 0) return v;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Chunked parallel loop. Work is cut into fixed-size chunks (independent of
// the worker count) and each chunk writes only to its own slots, so results
// are bitwise identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t grain = 256) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + grain - 1) / grain;
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n_chunks);
    if (n_workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([=, &fn, &first_error, &error_mutex] {
            try {
                for (std::size_t c = w; c < n_chunks; c += n_workers) {
                    const std::size_t lo = c * grain;
                    const std::size_t hi = std::min(n, lo + grain);
                    fn(lo, hi);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace greflect
