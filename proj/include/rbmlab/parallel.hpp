#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rbmlab {

/// Run work(0..n_chunks-1) across at most `threads` workers.  Chunk indices
/// are handed out dynamically; callers own determinism by writing results
/// into per-chunk slots and reducing in index order afterwards.
inline void parallel_chunks(std::size_t n_chunks, unsigned threads,
                            const std::function<void(std::size_t)>& work) {
    if (n_chunks == 0) return;
    if (threads <= 1 || n_chunks == 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) work(i);
        return;
    }
    const unsigned n_workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_chunks || failed.load()) return;
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace rbmlab
