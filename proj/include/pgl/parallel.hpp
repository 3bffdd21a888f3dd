#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace pgl {

// Worker count: explicit argument > PGL_THREADS env > hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PGL_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

namespace parallel_detail {
inline thread_local bool inside_worker = false;
}

// Runs body(chunk_index, begin, end) over fixed-size chunks of [0, count).
// The chunk grid depends only on `count`, never on the worker count, so a
// chunk-indexed reduction is bit-identical across thread counts. Nested
// calls from inside a worker run serially instead of spawning more threads.
template <typename Body>
void parallel_chunks(std::uint64_t count, std::uint64_t chunk_size, const Body& body,
                     unsigned threads = 0) {
    if (count == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    std::uint64_t n_chunks = (count + chunk_size - 1) / chunk_size;
    unsigned workers = resolve_threads(threads);
    if (workers > n_chunks) workers = static_cast<unsigned>(n_chunks);

    if (workers <= 1 || parallel_detail::inside_worker) {
        for (std::uint64_t c = 0; c < n_chunks; ++c)
            body(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
        return;
    }

    std::atomic<std::uint64_t> next{0};
    auto run = [&] {
        bool saved = parallel_detail::inside_worker;
        parallel_detail::inside_worker = true;
        for (;;) {
            std::uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            body(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
        }
        parallel_detail::inside_worker = saved;
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

}  // namespace pgl
