#ifndef NLQ_PARALLEL_HPP
#define NLQ_PARALLEL_HPP

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nlq {

/// Applies fn(i) for i in [0, count) across hardware threads and returns the
/// results in index order (deterministic merge regardless of scheduling).
template <typename Fn>
auto parallel_map(std::size_t count, Fn fn) {
    using T = decltype(fn(std::size_t{0}));
    std::vector<T> results(count);
    if (count == 0) return results;
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) results[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace nlq

#endif
