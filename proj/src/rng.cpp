#include "shardecon/rng.hpp"

#include <stdexcept>
#include <vector>

namespace shardecon {

namespace {
constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x)
{
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t agent, std::uint64_t height)
{
    std::uint64_t h = mix64(seed + golden_gamma);
    h = mix64(h ^ (static_cast<std::uint64_t>(purpose) * golden_gamma));
    h = mix64(h ^ mix64(agent + 0x632BE59BD9B4E019ULL));
    h = mix64(h ^ mix64(height + 0x85EBCA77C2B2AE63ULL));
    state_ = h;
}

std::uint64_t RngStream::next_u64()
{
    state_ += golden_gamma;
    return mix64(state_);
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::uniform(double lo, double hi)
{
    if (!(lo <= hi))
        throw std::invalid_argument("uniform: empty range");
    // Closed interval: scale a 53-bit integer by 1/(2^53 - 1).
    const double u = static_cast<double>(next_u64() >> 11) / 9007199254740991.0;
    return lo + (hi - lo) * u;
}

std::uint64_t RngStream::uniform_u64(std::uint64_t lo, std::uint64_t hi)
{
    if (lo > hi)
        throw std::invalid_argument("uniform_u64: empty range");
    const std::uint64_t span = hi - lo;
    if (span == UINT64_MAX)
        return next_u64();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return lo + x % range;
}

Amount RngStream::uniform_amount(const Amount& lo, const Amount& hi)
{
    if (lo > hi)
        throw std::invalid_argument("uniform_amount: empty range");
    const Amount span = hi - lo;
    if (span.fits_u64() && span.to_u64() != UINT64_MAX)
        return lo + Amount(uniform_u64(0, span.to_u64()));

    // Wide range: draw enough 64-bit words to cover span+1, reject overshoot.
    const mpz_class range = span.value() + 1;
    const std::size_t bits = mpz_sizeinbase(range.get_mpz_t(), 2);
    const std::size_t words = (bits + 63) / 64;
    std::vector<std::uint64_t> buf(words);
    mpz_class x;
    do {
        for (auto& w : buf)
            w = next_u64();
        const std::size_t excess = words * 64 - bits;
        buf.front() >>= excess;
        mpz_import(x.get_mpz_t(), words, 1, sizeof(std::uint64_t), 0, 0, buf.data());
    } while (cmp(x, range) >= 0);
    return lo + Amount(x);
}

bool RngStream::bernoulli(double p)
{
    if (p >= 1.0)
        return true;
    if (p <= 0.0)
        return false;
    return uniform01() < p;
}

}  // namespace shardecon
