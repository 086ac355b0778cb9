#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace logosp {

// Runs fn(begin, end) over [0, n) split into contiguous blocks, one per
// worker. Results must be written to disjoint, index-addressed slots so the
// outcome is identical for any thread count. The first exception (by lowest
// block start) is rethrown on the calling thread.
inline void parallel_blocks(size_t n, int threads, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    const size_t workers = std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(std::max(threads, 1)), n));
    if (workers == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    size_t first_error_block = n + 1;
    const size_t per = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t begin = w * per;
        const size_t end = std::min(n, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (begin < first_error_block) {
                    first_error_block = begin;
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace logosp
