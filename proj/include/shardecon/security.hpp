#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "shardecon/amount.hpp"

namespace shardecon::security {

class InvalidConfiguration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An exact probability plus its base-10 logarithm.
///
/// `exact` is the ground truth. `log10` is -infinity for zero and stays
/// meaningful far below the smallest double (committee failure probabilities
/// of 1e-20 and beyond are routine).
struct Probability {
    mpq_class exact;
    double log10 = -std::numeric_limits<double>::infinity();

    static Probability from_exact(mpq_class value);
    static Probability zero() { return from_exact(mpq_class(0)); }
    static Probability one() { return from_exact(mpq_class(1)); }

    bool is_zero() const { return sgn(exact) == 0; }
    double approx() const { return exact.get_d(); }
};

/// log10 of a positive rational without converting through double.
double log10_of(const mpq_class& value);

/// Committee layout: n nodes split into s shards of m = floor(n/s) nodes,
/// a verdict needs `threshold` agreeing members, `adversaries` nodes are bad.
struct ShardConfig {
    std::uint64_t nodes = 0;
    std::uint64_t shards = 0;
    std::uint64_t shard_size = 0;
    std::uint64_t threshold = 0;
    std::uint64_t adversaries = 0;

    /// Builds a config with shard_size = floor(nodes / shards) and validates it.
    static ShardConfig make(std::uint64_t nodes, std::uint64_t shards, std::uint64_t threshold,
                            std::uint64_t adversaries);

    /// Throws InvalidConfiguration when any invariant is broken.
    void validate() const;
};

/// Smallest T with T >= fraction * m, i.e. ceil(fraction * m).
std::uint64_t threshold_for(std::uint64_t shard_size, const Fraction& fraction);

/// Pr[X >= k] for X hypergeometric: `adversaries` bad nodes among
/// `population`, committee of `sample` drawn without replacement.
Probability hypergeom_tail(std::uint64_t population, std::uint64_t adversaries, std::uint64_t sample,
                           std::uint64_t k);

/// Strict-majority takeover threshold floor(m/2) + 1 for a classic committee.
inline std::uint64_t majority_threshold(std::uint64_t shard_size) { return shard_size / 2 + 1; }

/// Failure probability of one classic (uniformly sampled) shard under a
/// strict-majority takeover rule.
Probability classic_failure(std::uint64_t nodes, std::uint64_t adversaries, std::uint64_t shards);

/// Largest chance that the adversary holds `threshold` seats of one
/// courtroom in the occupation-based (jury) layout, maximised over every
/// feasible placement of its nodes across occupations.
Probability jury_failure(const ShardConfig& cfg);

/// Closed-form estimate (AD / (T*s))^T clamped to [0, 1].
Probability jury_failure_approx(const ShardConfig& cfg);

/// log10 of jury_failure computed in floating point; used as a fast filter.
double jury_failure_log10(const ShardConfig& cfg);

/// Largest shard count s >= 1 whose jury failure probability, with
/// m = floor(n/s) and T = ceil(threshold_fraction * m), is within `budget`.
/// Returns 0 when even a single shard exceeds the budget.
std::uint64_t max_shards(std::uint64_t nodes, std::uint64_t adversaries, const Fraction& threshold_fraction,
                         const Fraction& budget);

}  // namespace shardecon::security
