#include "shardecon/simulator.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "shardecon/security.hpp"

namespace shardecon {

UniformRange UniformRange::parse(const std::string& text)
{
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string t = trim(text);
    try {
        if (t.rfind("uniform(", 0) == 0 && t.back() == ')') {
            const std::string inner = t.substr(8, t.size() - 9);
            const auto comma = inner.find(',');
            if (comma == std::string::npos)
                throw ConfigError("uniform() needs two bounds");
            UniformRange r{Amount::parse(trim(inner.substr(0, comma))), Amount::parse(trim(inner.substr(comma + 1)))};
            if (r.lo > r.hi)
                throw ConfigError("uniform() bounds are inverted");
            return r;
        }
        const Amount v = Amount::parse(t);
        return {v, v};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("bad distribution '" + text + "': " + e.what());
    }
}

std::string UniformRange::str() const
{
    if (lo == hi)
        return lo.str();
    return "uniform(" + lo.str() + ", " + hi.str() + ")";
}

void SimConfig::validate() const
{
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    const auto& p = policy;
    if (!seed)
        fail("seed is required");
    if (threads == 0)
        fail("threads must be at least 1");
    if (p.target_ratio < 1.0)
        fail("policy.target_ratio must be at least 1");
    if (sgn(p.usage) <= 0 || cmp(p.usage, 1) >= 0)
        fail("policy.usage must lie in (0, 1)");
    if (p.avgq_window == 0)
        fail("policy.avgq_window must be positive");
    if (p.history_window < 2)
        fail("policy.window must be at least 2");
    if (p.bounds.gpl_min == 0 || p.bounds.gpl_min > p.bounds.gpl_max)
        fail("policy GPL bounds must satisfy 0 < gpl_min <= gpl_max");
    if (sgn(p.bounds.i_min) < 0 || cmp(p.bounds.i_min, p.bounds.i_max) > 0 || cmp(p.bounds.i_max, 1) > 0)
        fail("policy I bounds must satisfy 0 <= i_min <= i_max <= 1");
    if (p.initial_gpl < p.bounds.gpl_min || p.initial_gpl > p.bounds.gpl_max)
        fail("policy.initial_gpl outside its bounds");
    if (cmp(p.initial_i, p.bounds.i_min) < 0 || cmp(p.initial_i, p.bounds.i_max) > 0)
        fail("policy.initial_i outside its bounds");
    if (sgn(p.initial_avq) < 0)
        fail("policy.initial_avq must be nonnegative");
    if (p.ridge < 0)
        fail("policy.ridge must be nonnegative");
    if (mint_period == 0)
        fail("mint.period must be positive");
    if (min_shard_size == 0)
        fail("shards.min_size must be positive");
    if (cmp(threshold_fraction, mpq_class(1, 2)) <= 0 || cmp(threshold_fraction, 1) > 0)
        fail("shards.threshold_frac must lie in (0.5, 1]");
    if (sgn(failure_budget) <= 0 || cmp(failure_budget, 1) >= 0)
        fail("shards.failure_budget must lie in (0, 1)");
    if (sgn(adversary_fraction) < 0 || cmp(adversary_fraction, 1) > 0)
        fail("shards.adversary_frac must lie in [0, 1]");
    if (fear_line.hi.fits_u64() == false)
        fail("agents.fear_line too large");
    if (!(duty_reliability >= 0.0 && duty_reliability <= 1.0))
        fail("agents.duty must lie in [0, 1]");
    if (sgn(shock_factor) < 0)
        fail("shock.demand_factor must be nonnegative");
}

Amount mint_at(const SimConfig& config, Height height)
{
    const Height periods = height / config.mint_period;
    if (config.mint_decay == MintDecay::halving) {
        if (periods >= mpz_sizeinbase(config.mint_initial.value().get_mpz_t(), 2))
            return Amount();
        mpz_class out;
        mpz_fdiv_q_2exp(out.get_mpz_t(), config.mint_initial.value().get_mpz_t(), periods);
        return Amount(std::move(out));
    }
    const mpz_class cut = config.mint_step.value() * Amount(periods).value();
    if (cmp(cut, config.mint_initial.value()) >= 0)
        return Amount();
    return Amount(mpz_class(config.mint_initial.value() - cut));
}

namespace {

PolicyState::Params checked(const SimConfig& config)
{
    config.validate();
    return config.policy;
}

}  // namespace

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)),
      seed_(0),
      ledger_(config_.transaction_fee),
      policy_(checked(config_))
{
    seed_ = *config_.seed;
    genesis();
}

template <class Fn>
void Simulator::for_each_agent(Fn&& fn)
{
    const std::size_t n = agents_.size();
    const std::size_t workers = std::min<std::size_t>(config_.threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i)
                fn(i);
        });
    }
}

void Simulator::genesis()
{
    agents_.reserve(config_.population);
    for (std::uint64_t i = 0; i < config_.population; ++i) {
        AgentState agent;
        agent.id = static_cast<std::uint32_t>(i);
        agent.account = ledger_.open_account();
        agent.contract = ledger_.open_contract(agent.account);
        RngStream rng(seed_, StreamPurpose::genesis, i, 0);
        agent.demand = config_.demand.sample(rng);
        agent.fear_line = config_.fear_line.sample(rng).to_u64();
        agent.duty_reliability = config_.duty_reliability;
        const Amount balance = config_.initial_balance.sample(rng);
        ledger_.mint(balance);
        ledger_.pay_from_pool(agent.account, balance);
        agents_.push_back(std::move(agent));
    }
    ledger_.reset_inflow();
    const MonetarySnapshot start = compute_aggregates(ledger_, 0, config_.policy.target_ratio);
    price_ = update_price(config_.policy.usage, start.m2, config_.policy.initial_avq);
}

std::uint64_t Simulator::shard_count(std::uint64_t reliable)
{
    if (reliable < config_.min_shard_size)
        return 0;
    if (auto it = shard_cache_.find(reliable); it != shard_cache_.end())
        return it->second;
    const Amount adversaries = floor_mul(config_.adversary_fraction, Amount(reliable));
    const std::uint64_t s = std::max<std::uint64_t>(
        1, security::max_shards(reliable, adversaries.to_u64(), config_.threshold_fraction, config_.failure_budget));
    shard_cache_.emplace(reliable, s);
    return s;
}

void Simulator::release_if_done(Height cohort)
{
    auto it = cohort_serving_.find(cohort);
    if (it == cohort_serving_.end() || --it->second > 0)
        return;
    cohort_serving_.erase(it);
    ledger_.release_earmark(cohort);
}

void Simulator::end_service(AgentState& agent, Height cohort)
{
    agent.reliability.reset();
    release_if_done(cohort);
}

IntervalRecord Simulator::step()
{
    const Height h = ++height_;
    ledger_.set_height(h);
    ledger_.reset_inflow();

    IntervalRecord rec;
    rec.height = h;
    rec.gpl = policy_.gpl();
    rec.i = policy_.i();

    // (1) initial funding distribution
    ledger_.mint(mint_at(config_, h));

    // (2) demand walk
    for_each_agent([&](std::size_t i) {
        AgentState& a = agents_[i];
        RngStream rng(seed_, StreamPurpose::demand, a.id, h);
        step_demand(a, h, rng);
        if (h == config_.shock_height)
            a.demand = floor_mul(config_.shock_factor, a.demand);
    });

    // (3) reliable-node registrations
    const FeeSchedule fees{ledger_.transaction_fee()};
    std::vector<std::optional<Amount>> margins(agents_.size());
    for_each_agent([&](std::size_t i) {
        const AgentState& a = agents_[i];
        RngStream rng(seed_, StreamPurpose::participation, a.id, h);
        margins[i] = decide_participation(a, ledger_.balance(a.account), rec.gpl, fees, rng);
    });
    std::vector<DepositId> cohort;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (!margins[i])
            continue;
        AgentState& a = agents_[i];
        const DepositId d = ledger_.register_reliable(a.account, *margins[i], rec.gpl, h);
        a.reliability = Reliability{d, h + rec.gpl};
        maturing_[h + rec.gpl].push_back(d);
        cohort.push_back(d);
    }
    compensation_.resize(ledger_.deposits().size());
    rec.registrations = cohort.size();
    rec.gn = cohort.size();
    if (!cohort.empty())
        cohort_serving_[h] = cohort.size();

    // (4) shard sizing from the serving reliable population
    rec.shards = shard_count(ledger_.serving().size());
    rec.capacity = rec.shards * config_.shard_capacity;

    // (5) contract top-ups, then execution in agent-id order up to capacity
    std::vector<Amount> top_up(agents_.size());
    for_each_agent([&](std::size_t i) {
        const AgentState& a = agents_[i];
        const Amount& held = ledger_.contract_balance(a.contract);
        if (held >= a.demand)
            return;
        const Amount need = a.demand - held;
        const Amount& balance = ledger_.balance(a.account);
        if (balance >= need + fees.transaction_fee)
            top_up[i] = need;
        else if (balance > fees.transaction_fee)
            top_up[i] = balance - fees.transaction_fee;
    });
    std::uint64_t remaining = rec.capacity;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const AgentState& a = agents_[i];
        if (!top_up[i].is_zero())
            ledger_.fund_contract(a.account, a.contract, top_up[i], fees.transaction_fee);
        const Amount& held = ledger_.contract_balance(a.contract);
        if (held.is_zero())
            continue;
        mpz_class lines = held.value();
        if (!price_.is_zero())
            mpz_fdiv_q(lines.get_mpz_t(), held.value().get_mpz_t(), price_.value().get_mpz_t());
        const std::uint64_t requested = Amount(lines).fits_u64() ? Amount(lines).to_u64() : UINT64_MAX;
        const std::uint64_t granted = std::min(requested, remaining);
        if (granted > 0) {
            const ExecutionResult run = ledger_.execute_contract(a.contract, granted, price_);
            rec.money.lines_executed += run.executed_lines;
            remaining -= run.executed_lines;
        }
        rec.pending += requested - granted;
    }

    // (6) duty checks
    std::vector<AccountId> maintainers;
    for (AgentState& a : agents_) {
        if (!a.serving())
            continue;
        RngStream rng(seed_, StreamPurpose::duty, a.id, h);
        if (perform_duty(a, rng)) {
            maintainers.push_back(a.account);
            continue;
        }
        const MarginDeposit& d = ledger_.deposit(a.reliability->deposit);
        const Height start = d.start;
        ledger_.confiscate_deposit(d.id);
        ++rec.confiscations;
        end_service(a, start);
    }
    rec.maintainers = maintainers.size();

    // (7) reward split of this interval's pool inflow
    rec.money.inflow = ledger_.inflow();
    std::vector<DepositId> members;
    std::vector<Amount> member_margins;
    for (DepositId d : cohort) {
        const MarginDeposit& dep = ledger_.deposit(d);
        if (dep.status != DepositStatus::serving)
            continue;
        members.push_back(d);
        member_margins.push_back(dep.principal);
    }
    const RewardSplit split = split_rewards(rec.money.inflow, policy_.i(), member_margins, maintainers.size());
    if (!split.earmark.is_zero()) {
        ledger_.reserve_earmark(h, split.earmark);
        for (std::size_t k = 0; k < members.size(); ++k)
            compensation_[index_of(members[k])] = split.shares[k];
    }
    if (!split.per_maintainer.is_zero())
        for (AccountId who : maintainers)
            ledger_.pay_from_pool(who, split.per_maintainer);

    // (8) maturities
    if (auto due = maturing_.find(h); due != maturing_.end()) {
        for (DepositId d : due->second) {
            const MarginDeposit& dep = ledger_.deposit(d);
            if (dep.status != DepositStatus::serving)
                continue;
            const Height start = dep.start;
            AgentState& owner = agents_[index_of(dep.owner)];
            ledger_.mature_deposit(d, compensation_[index_of(d)]);
            compensation_[index_of(d)] = Amount();
            ++rec.maturations;
            end_service(owner, start);
        }
        maturing_.erase(due);
    }

    // (9) aggregates
    const Amount price_now = price_;
    const std::uint64_t lines = rec.money.lines_executed;
    const Amount inflow = rec.money.inflow;
    rec.money = compute_aggregates(ledger_, h, config_.policy.target_ratio);
    rec.money.lines_executed = lines;
    rec.money.price = price_now;
    rec.money.inflow = inflow;

    // (10)-(11) next price, and the controller once warmup is over
    price_ = policy_.close_interval(h, lines, rec.money.m2, rec.gn, rec.money.ratio);

    if (config_.audit_every > 0 && h % config_.audit_every == 0) {
        if (const std::string problem = ledger_.audit(); !problem.empty())
            throw InvariantViolation("interval " + std::to_string(h) + ": " + problem);
    }
    return rec;
}

std::vector<IntervalRecord> Simulator::run()
{
    std::vector<IntervalRecord> out;
    out.reserve(config_.intervals > height_ ? config_.intervals - height_ : 0);
    while (height_ < config_.intervals)
        out.push_back(step());
    return out;
}

std::vector<IntervalRecord> run(const SimConfig& config)
{
    Simulator sim(config);
    return sim.run();
}

}  // namespace shardecon
