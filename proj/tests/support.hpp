#pragma once

#include "hes1/params.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace hes1::testing {

/// Seeded generator for randomized property checks.
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    /// Log-uniform on [lo, hi].
    double log_uniform(double lo = 1e-2, double hi = 1e2) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Random valid parameters with every rate log-uniform on [1e-2, 1e2] and k_0 = 1.
    ParamValues values(int n) {
        ParamValues v;
        v.n = n;
        v.k_binding.assign(1, 1.0);
        v.k_binding.resize(static_cast<std::size_t>(n));
        for (int j = 1; j < n; ++j) v.k_binding[static_cast<std::size_t>(j)] = log_uniform();
        v.gamma.clear();
        for (int j = 0; j < n; ++j) v.gamma.push_back(log_uniform());
        if (n == 0) v.k_binding.clear();
        v.kk = log_uniform();
        v.delta1 = log_uniform();
        v.delta2 = log_uniform();
        v.theta = log_uniform();
        v.eps1 = log_uniform();
        v.eps2 = log_uniform();
        return v;
    }

    ModelParams params(int n) { return ModelParams(values(n)); }
    ModelParams params() { return params(integer(1, 9)); }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace hes1::testing
