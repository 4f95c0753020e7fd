#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "hyperlens/errors.hpp"

namespace hyperlens {

namespace detail {

// Fixed-order pairwise (cascade) reduction. The split points depend only on
// the index range, so a given input order always produces the same bits;
// rounding error grows O(log n) instead of O(n).
template <class Term>
double pairwise_reduce(std::size_t begin, std::size_t end, const Term& term) {
    const std::size_t n = end - begin;
    if (n <= 16) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_reduce(begin, mid, term) + pairwise_reduce(mid, end, term);
}

} // namespace detail

inline double pairwise_sum(std::span<const double> v) {
    return detail::pairwise_reduce(0, v.size(), [&](std::size_t i) { return v[i]; });
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw InvalidInputError("mean of empty sequence");
    return pairwise_sum(v) / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
inline double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    const double ss = detail::pairwise_reduce(0, v.size(), [&](std::size_t i) {
        const double d = v[i] - m;
        return d * d;
    });
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InvalidInputError("dot: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
    return detail::pairwise_reduce(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double squared_norm(std::span<const double> v) {
    return detail::pairwise_reduce(0, v.size(), [&](std::size_t i) { return v[i] * v[i]; });
}

inline double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Quantile with linear interpolation between order statistics
// (the numpy default). `sorted` must be ascending and nonempty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InvalidInputError("quantile of empty sequence");
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Dense row-major matrix of doubles. Small sizes throughout (slot counts are
// tens, patch counts are hundreds), so no view machinery beyond row spans.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data.data() + r * cols, cols);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data.data() + r * cols, cols);
    }
    bool operator==(const Matrix&) const = default;
};

// Runs fn(i) for i in [0, n). Work is claimed through an atomic counter, but
// each index owns its output slot, so callers get deterministic results for
// any worker count as long as they aggregate by index afterwards.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw == 0 ? 1 : static_cast<int>(hw);
    }
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace hyperlens
