#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "shardecon/agents.hpp"
#include "shardecon/amount.hpp"
#include "shardecon/ledger.hpp"
#include "shardecon/monetary_policy.hpp"

namespace shardecon {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integer distribution for agent attributes: uniform over [lo, hi]
/// (a constant when lo == hi).
struct UniformRange {
    Amount lo;
    Amount hi;

    static UniformRange parse(const std::string& text);
    std::string str() const;
    Amount sample(RngStream& rng) const { return rng.uniform_amount(lo, hi); }
};

enum class MintDecay { halving, subtract };

struct SimConfig {
    std::uint64_t population = 0;
    Height intervals = 0;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;

    PolicyState::Params policy;

    Amount mint_initial{50'000'000'000ULL};
    Height mint_period = 100;
    MintDecay mint_decay = MintDecay::halving;
    Amount mint_step{2};  // per period, subtract mode only

    Amount transaction_fee{1};

    std::uint64_t shard_capacity = 1000;  // lines per shard per interval
    std::uint64_t min_shard_size = 20;
    Fraction threshold_fraction{7, 10};
    Fraction failure_budget{1, 1'000'000};
    Fraction adversary_fraction{1, 2};

    UniformRange demand{Amount(1), Amount(100)};
    UniformRange fear_line{Amount(50), Amount(1000)};
    UniformRange initial_balance{Amount(1000), Amount(100'000)};
    double duty_reliability = 1.0;

    /// Multiplies every agent's demand once, at `shock_height` (0 disables).
    Height shock_height = 0;
    Fraction shock_factor{1};

    /// Full conservation audit every this many intervals (0 disables).
    Height audit_every = 1;

    /// Throws ConfigError naming the first inconsistent field.
    void validate() const;
};

/// Newly minted amount at `height`: halving divides the initial amount by 2
/// every period, subtract removes `mint_step` every period; never negative.
Amount mint_at(const SimConfig& config, Height height);

struct IntervalRecord {
    Height height = 0;
    MonetarySnapshot money;
    std::uint64_t gpl = 0;
    std::uint64_t gn = 0;
    Fraction i;
    std::uint64_t shards = 0;
    std::uint64_t capacity = 0;
    std::uint64_t pending = 0;
    std::uint64_t registrations = 0;
    std::uint64_t maturations = 0;
    std::uint64_t confiscations = 0;
    std::uint64_t maintainers = 0;
};

/// Deterministic per-interval economy. One Simulator owns the ledger, the
/// agents and the controller; `step` advances one interval.
class Simulator {
public:
    explicit Simulator(SimConfig config);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    /// Advances one interval and returns its record.
    IntervalRecord step();

    /// Runs the remaining configured intervals.
    std::vector<IntervalRecord> run();

    /// Streams the ledger operation log (genesis operations are already past).
    void set_oplog(std::ostream* out) { ledger_.set_oplog(out); }

    const SimConfig& config() const { return config_; }
    const Ledger& ledger() const { return ledger_; }
    const std::vector<AgentState>& agents() const { return agents_; }
    const PolicyState& policy() const { return policy_; }
    const Amount& price() const { return price_; }
    Height height() const { return height_; }

    /// Shard count for `reliable` serving nodes: 0 below the minimum shard
    /// size, otherwise max_shards under the configured adversary share (at
    /// least 1).
    std::uint64_t shard_count(std::uint64_t reliable);

    /// Ledger invariant failures abort the run with this error.
    class InvariantViolation : public std::logic_error {
    public:
        using std::logic_error::logic_error;
    };

private:
    template <class Fn>
    void for_each_agent(Fn&& fn);

    void genesis();
    void release_if_done(Height cohort);
    void end_service(AgentState& agent, Height cohort);

    SimConfig config_;
    std::uint64_t seed_;
    Ledger ledger_;
    PolicyState policy_;
    std::vector<AgentState> agents_;
    Amount price_;
    Height height_ = 0;

    std::vector<Amount> compensation_;             // by deposit id
    std::map<Height, std::vector<DepositId>> maturing_;
    std::map<Height, std::uint64_t> cohort_serving_;
    std::unordered_map<std::uint64_t, std::uint64_t> shard_cache_;
};

/// Convenience: build a simulator and run it to completion.
std::vector<IntervalRecord> run(const SimConfig& config);

}  // namespace shardecon
