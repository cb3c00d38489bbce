#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace zrl {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) without leaving the log domain.
inline double log_add_exp(double a, double b) {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> xs) {
    double hi = neg_inf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == neg_inf) return neg_inf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

/// Streaming log-sum-exp accumulator.
class LogSumAccumulator {
  public:
    void add(double log_term) { value_ = log_add_exp(value_, log_term); }
    double value() const { return value_; }
    bool empty() const { return value_ == neg_inf; }

  private:
    double value_ = neg_inf;
};

/// Uniform double in [0, 1) built from raw engine output. Unlike
/// std::uniform_real_distribution this is bit-identical across standard
/// library implementations, which the seeded-reproducibility contracts need.
inline double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; all our n are tiny.
    return rng() % n;
}

inline double gumbel_draw(std::mt19937_64& rng) {
    double u = uniform_double(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(-std::log(u));
}

/// Point on the (n-1)-simplex via normalized exponential draws.
inline std::vector<double> simplex_draw(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
        double u = uniform_double(rng);
        if (u <= 0.0) u = 0x1.0p-53;
        x = -std::log(u);
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace zrl
