#pragma once

// Brute-force reference implementations. They share nothing with the library
// beyond GMP and are only usable on small inputs.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include <gmpxx.h>

namespace oracle {

/// Pr[at least k adversaries in a committee of m] by visiting every m-subset
/// of n nodes (bitmask walk, Gosper's hack). Nodes 0..t-1 are adversarial.
inline mpq_class subset_tail(unsigned n, unsigned t, unsigned m, unsigned k)
{
    if (m == 0 || m > n)
        return k == 0 ? mpq_class(1) : mpq_class(0);
    const std::uint64_t bad = t >= 64 ? ~0ULL : ((1ULL << t) - 1);
    const std::uint64_t limit = 1ULL << n;
    std::uint64_t hits = 0;
    std::uint64_t total = 0;
    for (std::uint64_t set = (1ULL << m) - 1; set < limit;) {
        ++total;
        if (static_cast<unsigned>(__builtin_popcountll(set & bad)) >= k)
            ++hits;
        const std::uint64_t low = set & (~set + 1);
        const std::uint64_t ripple = set + low;
        set = (((ripple ^ set) >> 2) / low) | ripple;
    }
    mpq_class p(static_cast<unsigned long>(hits), static_cast<unsigned long>(total));
    p.canonicalize();
    return p;
}

/// Visits every m-subset of n nodes once and, for every adversary count t at
/// the same time, tallies how many adversaries it holds.
/// counts[t][c] = number of subsets with exactly c of nodes 0..t-1.
inline std::vector<std::vector<std::uint64_t>> subset_counts(unsigned n, unsigned m)
{
    // diff[c][t]: a subset whose sorted members are b_0 < b_1 < ... holds
    // exactly j+1 adversaries for every t in (b_j, b_{j+1}].
    std::vector<std::vector<std::int64_t>> diff(m + 1, std::vector<std::int64_t>(n + 2, 0));
    const std::uint64_t limit = 1ULL << n;
    for (std::uint64_t set = (1ULL << m) - 1; set < limit;) {
        std::uint64_t rest = set;
        unsigned prev = 0;  // t range start for the current count
        unsigned c = 0;
        while (rest) {
            const unsigned b = static_cast<unsigned>(__builtin_ctzll(rest));
            rest &= rest - 1;
            diff[c][prev] += 1;
            diff[c][b + 1] -= 1;
            prev = b + 1;
            ++c;
        }
        diff[c][prev] += 1;
        diff[c][n + 1] -= 1;
        const std::uint64_t low = set & (~set + 1);
        const std::uint64_t ripple = set + low;
        set = (((ripple ^ set) >> 2) / low) | ripple;
    }
    std::vector<std::vector<std::uint64_t>> counts(n + 1, std::vector<std::uint64_t>(m + 1, 0));
    for (unsigned c = 0; c <= m; ++c) {
        std::int64_t run = 0;
        for (unsigned t = 0; t <= n; ++t) {
            run += diff[c][t];
            counts[t][c] = static_cast<std::uint64_t>(run);
        }
    }
    return counts;
}

/// max over all (A_1..A_T) with sum AD and 0 <= A_i <= s of prod(A_i / s).
/// 1 when AD >= T*s (the adversary can fill T whole occupations).
inline mpq_class jury_exhaustive(unsigned ad, unsigned t, unsigned s)
{
    if (ad >= t * s)
        return 1;
    mpq_class best = 0;
    std::vector<unsigned> parts(t, 0);
    std::function<void(unsigned, unsigned)> walk = [&](unsigned slot, unsigned left) {
        if (slot + 1 == t) {
            if (left > s)
                return;
            parts[slot] = left;
            mpq_class p = 1;
            for (unsigned a : parts)
                p *= mpq_class(a, s);
            p.canonicalize();
            if (p > best)
                best = p;
            return;
        }
        for (unsigned a = 0; a <= std::min(left, s); ++a) {
            parts[slot] = a;
            walk(slot + 1, left - a);
        }
    };
    walk(0, ad);
    return best;
}

}  // namespace oracle
