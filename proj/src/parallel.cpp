#include "noisegen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "noisegen/sampling.hpp"

namespace noisegen {

IndexedError::IndexedError(std::size_t i, const std::string& what)
    : std::runtime_error("item " + std::to_string(i) + ": " + what), index(i) {}

int resolve_workers(int requested) {
    if (requested < 0) throw ParameterError("workers must be >= 1, got " + std::to_string(requested));
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NOISEGEN_WORKERS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096)
            throw ParameterError(std::string("NOISEGEN_WORKERS must be a positive integer, got '") + env + "'");
        return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers < 1) throw ParameterError("parallel_for: workers must be >= 1");
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t bad = std::numeric_limits<std::size_t>::max();
    std::string message;

    auto run = [&] {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < bad) {
                    bad = i;
                    message = e.what();
                }
                failed = true;
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < bad) {
                    bad = i;
                    message = "unknown error";
                }
                failed = true;
            }
        }
    };

    const int t = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n, 1)));
    if (t == 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(t);
        for (int k = 0; k < t; ++k) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    if (failed) throw IndexedError(bad, message);
}

}  // namespace noisegen
