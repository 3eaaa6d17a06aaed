#pragma once

#include <cstdint>
#include <optional>

#include "shardecon/amount.hpp"
#include "shardecon/ledger.hpp"
#include "shardecon/rng.hpp"

namespace shardecon {

/// A serving reliable-node registration held by an agent.
struct Reliability {
    DepositId deposit{};
    Height end = 0;
};

/// One simulated node. It buys execution every interval and registers as a
/// reliable node whenever its time to bankruptcy drops to its fear line.
struct AgentState {
    std::uint32_t id = 0;
    AccountId account{};
    ContractId contract{};
    Amount demand;                 // currency spent on execution per interval
    std::uint64_t fear_line = 0;   // intervals
    std::optional<Reliability> reliability;
    double duty_reliability = 1.0;

    bool serving() const { return reliability.has_value(); }
};

/// Intervals between demand adjustments and the adjustment band.
inline constexpr Height demand_cycle = 10;
inline constexpr double demand_swing = 0.05;

/// On every tenth interval scales demand by a uniform factor in
/// [0.95, 1.05] and floors it; other intervals leave it unchanged.
void step_demand(AgentState& agent, Height height, RngStream& rng);

/// floor(demand * factor) with the factor taken as its exact binary value.
Amount scale_demand(const Amount& demand, double factor);

/// floor(balance / demand); nullopt stands for an infinite horizon (demand 0).
std::optional<Amount> time_to_bankruptcy(const Amount& balance, const Amount& demand);

struct FeeSchedule {
    Amount transaction_fee{1};
};

/// Money an agent must keep to go on buying for the whole term and pay for
/// the registration itself.
Amount projected_spend(const Amount& demand, Height term, const FeeSchedule& fees);

/// Returns the margin to freeze when the agent's time to bankruptcy is at or
/// below its fear line, it is not already serving, and something is left
/// after the projected spend. The margin is uniform over
/// [1, balance - projected spend].
std::optional<Amount> decide_participation(const AgentState& agent, const Amount& balance, Height term,
                                           const FeeSchedule& fees, RngStream& rng);

/// True when the agent stays online and votes this interval.
bool perform_duty(const AgentState& agent, RngStream& rng);

}  // namespace shardecon
