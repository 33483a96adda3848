#ifndef REGLAB_PARALLEL_HPP
#define REGLAB_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace reglab {

/// Run fn(i) for i in [0, count) on a small thread pool. Work items must be
/// independent; used for frequency grids and parameter sweeps.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, unsigned max_threads = 0) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    unsigned n_threads = max_threads == 0 ? std::min(hw, 8u) : std::min(max_threads, hw);
    if (count < 2 || n_threads < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        workers.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace reglab

#endif  // REGLAB_PARALLEL_HPP
