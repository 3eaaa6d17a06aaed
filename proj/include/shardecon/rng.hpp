#pragma once

#include <cstdint>

#include "shardecon/amount.hpp"

namespace shardecon {

/// What a draw is used for; part of every stream key so that the demand walk,
/// margin sizing and duty checks of one agent never share variates.
enum class StreamPurpose : std::uint64_t {
    genesis = 1,
    demand = 2,
    participation = 3,
    duty = 4,
};

/// A counter-based random stream keyed by (seed, purpose, agent, height).
///
/// Each key yields an independent splitmix64 sequence, so an agent's draws do
/// not depend on how many other agents were stepped before it or on which
/// worker thread stepped it.
class RngStream {
public:
    RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t agent, std::uint64_t height);
    explicit RngStream(std::uint64_t raw_state) : state_(raw_state) {}

    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform double in [lo, hi].
    double uniform(double lo, double hi);

    /// Uniform integer in [lo, hi]; unbiased (rejection sampling).
    std::uint64_t uniform_u64(std::uint64_t lo, std::uint64_t hi);

    /// Uniform amount in [lo, hi]; unbiased for any width.
    Amount uniform_amount(const Amount& lo, const Amount& hi);

    bool bernoulli(double p);

private:
    std::uint64_t state_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace shardecon
