#include "shardecon/security.hpp"

#include <algorithm>
#include <cmath>

namespace shardecon::security {

namespace {

mpz_class binomial(std::uint64_t n, std::uint64_t k)
{
    mpz_class out;
    if (k > n)
        return out;
    mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return out;
}

mpz_class power(std::uint64_t base, std::uint64_t exponent)
{
    mpz_class out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(base), static_cast<unsigned long>(exponent));
    return out;
}

double log10_of(const mpz_class& z)
{
    long exp2 = 0;
    const double mant = mpz_get_d_2exp(&exp2, z.get_mpz_t());
    return std::log10(mant) + static_cast<double>(exp2) * std::log10(2.0);
}

// The adversary's best placement fills the first T occupations as evenly as
// possible: r seats get q+1 nodes, T-r get q, with every count capped at s.
struct Placement {
    std::uint64_t base = 0;       // q
    std::uint64_t heavier = 0;    // r occupations carrying q+1
    std::uint64_t threshold = 0;  // T
};

Placement best_placement(const ShardConfig& cfg)
{
    const std::uint64_t T = cfg.threshold;
    const std::uint64_t s = cfg.shards;
    // T*s cannot overflow: T <= m <= n/s.
    const std::uint64_t usable = std::min(cfg.adversaries, T * s);
    return {usable / T, usable % T, T};
}

}  // namespace

double log10_of(const mpq_class& value)
{
    if (sgn(value) <= 0)
        return -std::numeric_limits<double>::infinity();
    return log10_of(value.get_num()) - log10_of(value.get_den());
}

Probability Probability::from_exact(mpq_class value)
{
    value.canonicalize();
    if (sgn(value) < 0 || cmp(value, 1) > 0)
        throw InvalidConfiguration("probability outside [0,1]: " + value.get_str());
    Probability p;
    p.log10 = log10_of(value);
    p.exact = std::move(value);
    return p;
}

ShardConfig ShardConfig::make(std::uint64_t nodes, std::uint64_t shards, std::uint64_t threshold,
                              std::uint64_t adversaries)
{
    if (shards == 0)
        throw InvalidConfiguration("shard count must be positive");
    ShardConfig cfg{nodes, shards, nodes / shards, threshold, adversaries};
    cfg.validate();
    return cfg;
}

void ShardConfig::validate() const
{
    if (nodes == 0)
        throw InvalidConfiguration("node count must be positive");
    if (shards == 0)
        throw InvalidConfiguration("shard count must be positive");
    if (shard_size == 0)
        throw InvalidConfiguration("shard size must be positive (too many shards for " + std::to_string(nodes) +
                                   " nodes)");
    if (shard_size > nodes / shards)
        throw InvalidConfiguration("shards * shard size exceeds node count");
    if (threshold > shard_size || 2 * threshold <= shard_size)
        throw InvalidConfiguration("threshold " + std::to_string(threshold) + " must satisfy m/2 < T <= m (m = " +
                                   std::to_string(shard_size) + ")");
    if (adversaries > nodes)
        throw InvalidConfiguration("adversary count exceeds node count");
}

std::uint64_t threshold_for(std::uint64_t shard_size, const Fraction& fraction)
{
    if (sgn(fraction) <= 0 || cmp(fraction, 1) > 0)
        throw InvalidConfiguration("threshold fraction must lie in (0, 1]");
    const mpz_class scaled = fraction.get_num() * Amount(shard_size).value();
    mpz_class t;
    mpz_cdiv_q(t.get_mpz_t(), scaled.get_mpz_t(), fraction.get_den_mpz_t());
    return t.get_ui();
}

Probability hypergeom_tail(std::uint64_t population, std::uint64_t adversaries, std::uint64_t sample,
                           std::uint64_t k)
{
    if (adversaries > population)
        throw InvalidConfiguration("adversary count exceeds population");
    if (sample < 1 || sample > population)
        throw InvalidConfiguration("sample size must lie in [1, population]");
    if (k > sample)
        throw InvalidConfiguration("threshold count exceeds sample size");

    const std::uint64_t honest = population - adversaries;
    const std::uint64_t hi = std::min(sample, adversaries);
    // X adversaries need sample - X honest members.
    const std::uint64_t lo = std::max(k, sample > honest ? sample - honest : 0);

    mpz_class favourable;
    for (std::uint64_t x = lo; x <= hi; ++x)
        favourable += binomial(adversaries, x) * binomial(honest, sample - x);
    return Probability::from_exact(mpq_class(favourable, binomial(population, sample)));
}

Probability classic_failure(std::uint64_t nodes, std::uint64_t adversaries, std::uint64_t shards)
{
    if (shards == 0 || shards > nodes)
        throw InvalidConfiguration("shard count must lie in [1, n]");
    const std::uint64_t m = nodes / shards;
    return hypergeom_tail(nodes, adversaries, m, majority_threshold(m));
}

Probability jury_failure(const ShardConfig& cfg)
{
    cfg.validate();
    const Placement p = best_placement(cfg);
    if (p.base == 0)
        return Probability::zero();
    const mpz_class num = power(p.base + 1, p.heavier) * power(p.base, p.threshold - p.heavier);
    const mpz_class den = power(cfg.shards, p.threshold);
    return Probability::from_exact(mpq_class(num, den));
}

double jury_failure_log10(const ShardConfig& cfg)
{
    cfg.validate();
    const Placement p = best_placement(cfg);
    if (p.base == 0)
        return -std::numeric_limits<double>::infinity();
    const double log_s = std::log10(static_cast<double>(cfg.shards));
    const double heavy = std::log10(static_cast<double>(p.base + 1)) - log_s;
    const double light = std::log10(static_cast<double>(p.base)) - log_s;
    return static_cast<double>(p.heavier) * heavy + static_cast<double>(p.threshold - p.heavier) * light;
}

Probability jury_failure_approx(const ShardConfig& cfg)
{
    cfg.validate();
    if (cfg.adversaries == 0)
        return Probability::zero();
    const std::uint64_t seats = cfg.threshold * cfg.shards;
    if (cfg.adversaries >= seats)
        return Probability::one();
    const mpz_class num = power(cfg.adversaries, cfg.threshold);
    const mpz_class den = power(seats, cfg.threshold);
    Probability p;
    p.exact = mpq_class(num, den);
    p.exact.canonicalize();
    p.log10 = static_cast<double>(cfg.threshold) *
              (std::log10(static_cast<double>(cfg.adversaries)) - std::log10(static_cast<double>(seats)));
    return p;
}

std::uint64_t max_shards(std::uint64_t nodes, std::uint64_t adversaries, const Fraction& threshold_fraction,
                         const Fraction& budget)
{
    if (nodes == 0)
        throw InvalidConfiguration("node count must be positive");
    if (adversaries > nodes)
        throw InvalidConfiguration("adversary count exceeds node count");
    if (cmp(threshold_fraction, mpq_class(1, 2)) <= 0 || cmp(threshold_fraction, 1) > 0)
        throw InvalidConfiguration("threshold fraction must lie in (0.5, 1]");
    if (sgn(budget) <= 0 || cmp(budget, 1) >= 0)
        throw InvalidConfiguration("failure budget must lie in (0, 1)");

    const double log_budget = log10_of(budget);
    // Floating filter; only near-ties are settled with exact rationals.
    constexpr double tie_band = 1e-9;

    std::uint64_t best = 0;
    for (std::uint64_t s = 1; s <= nodes; ++s) {
        const std::uint64_t m = nodes / s;
        const ShardConfig cfg{nodes, s, m, threshold_for(m, threshold_fraction), adversaries};
        const double lp = jury_failure_log10(cfg);
        bool within = false;
        if (lp < log_budget - tie_band)
            within = true;
        else if (lp > log_budget + tie_band)
            within = false;
        else
            within = cmp(jury_failure(cfg).exact, budget) <= 0;
        if (within)
            best = s;
    }
    return best;
}

}  // namespace shardecon::security
