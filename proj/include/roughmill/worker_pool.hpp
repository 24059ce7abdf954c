#ifndef ROUGHMILL_WORKER_POOL_HPP
#define ROUGHMILL_WORKER_POOL_HPP

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace roughmill {

// Runs body(0..n-1) on up to `threads` workers.  Each index writes its own
// result slot in the caller, so aggregation order cannot depend on
// scheduling; the first exception is rethrown on the calling thread.
inline void parallel_replicas(int n, int threads, const std::function<void(int)>& body) {
    if (n <= 0) return;
    if (threads < 1) threads = 1;
    if (threads == 1 || n == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> crew;
    crew.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        crew.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : crew) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace roughmill

#endif
