#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vcwidth {

namespace detail {
inline std::atomic<unsigned>& worker_setting() {
    static std::atomic<unsigned> workers{0};
    return workers;
}
}  // namespace detail

/// Number of worker threads used by the parallel loops. Zero means
/// std::thread::hardware_concurrency().
inline void set_worker_threads(unsigned n) { detail::worker_setting().store(n); }

inline unsigned worker_threads() {
    unsigned n = detail::worker_setting().load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs body(begin, end) over consecutive chunks covering [0, count). Chunks
/// are handed out dynamically; callers write results to per-index storage so
/// the outcome never depends on the thread count.
template <typename Body>
void parallel_chunks(std::size_t count, std::size_t chunk, Body&& body) {
    if (count == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t chunks = (count + chunk - 1) / chunk;
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(worker_threads(), chunks));
    if (threads <= 1) {
        body(std::size_t{0}, count);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= count) return;
                body(begin, std::min(count, begin + chunk));
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(count);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

template <typename Body>
void parallel_for(std::size_t count, Body&& body, std::size_t chunk = 256) {
    parallel_chunks(count, chunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) body(i);
    });
}

}  // namespace vcwidth
