#pragma once

// Deterministic helper for data-parallel quadrature loops: results are
// stored per index and reduced serially in index order afterwards, so sums
// are bit-identical for any thread count.

#include <atomic>
#include <thread>
#include <vector>

namespace dislsim {

template <class T, class F>
std::vector<T> parallel_map(int n, const F& f) {
    std::vector<T> out(n);
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = int(std::min<unsigned>(hw ? hw : 1, 4));
    if (workers <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<int> next{0};
    auto body = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) break;
            out[i] = f(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers - 1; ++w) pool.emplace_back(body);
    body();
    for (std::thread& t : pool) t.join();
    return out;
}

}  // namespace dislsim
