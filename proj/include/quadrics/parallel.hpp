#pragma once

#include <cstdint>
#include <future>
#include <thread>
#include <vector>

namespace quadrics {

/// Splits [lo, hi) into `workers` contiguous chunks, runs `body(chunk_lo,
/// chunk_hi)` on each, and combines the partial results in chunk order, so
/// the outcome is independent of scheduling. `combine(acc, part)` must be
/// associative over adjacent ranges.
template <class R, class Body, class Combine>
R parallel_chunks(int64_t lo, int64_t hi, int workers, R init, Body&& body, Combine&& combine) {
    if (hi <= lo) return init;
    if (workers < 1) workers = 1;
    int64_t n = hi - lo;
    if (workers == 1 || n < 2) {
        R part = body(lo, hi);
        return combine(std::move(init), std::move(part));
    }
    int w = static_cast<int>(std::min<int64_t>(workers, n));
    std::vector<std::future<R>> futs;
    futs.reserve(static_cast<size_t>(w));
    for (int i = 0; i < w; ++i) {
        int64_t a = lo + n * i / w;
        int64_t b = lo + n * (i + 1) / w;
        futs.push_back(std::async(std::launch::async, [a, b, &body] { return body(a, b); }));
    }
    R acc = std::move(init);
    for (auto& f : futs) acc = combine(std::move(acc), f.get());
    return acc;
}

inline int default_workers() { return 1; }

}  // namespace quadrics
