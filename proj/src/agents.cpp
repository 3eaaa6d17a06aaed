#include "shardecon/agents.hpp"

namespace shardecon {

Amount scale_demand(const Amount& demand, double factor)
{
    if (!(factor >= 0))
        throw std::domain_error("demand factor must be nonnegative");
    return floor_mul(Fraction(factor), demand);
}

void step_demand(AgentState& agent, Height height, RngStream& rng)
{
    if (height % demand_cycle != 0)
        return;
    const double factor = rng.uniform(1.0 - demand_swing, 1.0 + demand_swing);
    agent.demand = scale_demand(agent.demand, factor);
}

std::optional<Amount> time_to_bankruptcy(const Amount& balance, const Amount& demand)
{
    if (demand.is_zero())
        return std::nullopt;
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), balance.value().get_mpz_t(), demand.value().get_mpz_t());
    return Amount(std::move(q));
}

Amount projected_spend(const Amount& demand, Height term, const FeeSchedule& fees)
{
    return demand * term + fees.transaction_fee;
}

std::optional<Amount> decide_participation(const AgentState& agent, const Amount& balance, Height term,
                                           const FeeSchedule& fees, RngStream& rng)
{
    if (agent.serving())
        return std::nullopt;
    const auto horizon = time_to_bankruptcy(balance, agent.demand);
    if (!horizon || *horizon > Amount(agent.fear_line))
        return std::nullopt;
    const Amount reserve = projected_spend(agent.demand, term, fees);
    if (balance <= reserve)
        return std::nullopt;
    return rng.uniform_amount(Amount(1), balance - reserve);
}

bool perform_duty(const AgentState& agent, RngStream& rng) { return rng.bernoulli(agent.duty_reliability); }

}  // namespace shardecon
