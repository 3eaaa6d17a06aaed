#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "shardecon/amount.hpp"
#include "shardecon/ledger.hpp"

namespace shardecon {

/// Money supply at the end of one interval.
///
///   M0 = transaction balances
///   M1 = M0 + smart-contract balances
///   M2 = M1 + serving margin principals
///
/// The funding pool sits outside all three.
struct MonetarySnapshot {
    Height height = 0;
    Amount m0;
    Amount m1;
    Amount m2;
    std::uint64_t lines_executed = 0;  // Q
    Amount price;                      // P in force during the interval
    Amount inflow;                     // R
    double ratio = 0.0;                // M2 / M1
};

/// Sums the ledger by account class. With M1 == 0 the ratio is reported as
/// `neutral_ratio` (the controller's target) instead of dividing by zero.
MonetarySnapshot compute_aggregates(const Ledger& ledger, Height height, double neutral_ratio);

/// floor(usage * m2_prev / (avg_lines + 1)).
Amount update_price(const Fraction& usage, const Amount& m2_prev, const Fraction& avg_lines);

struct RewardSplit {
    Amount earmark;                // reserved for the registration cohort
    std::vector<Amount> shares;    // per cohort member, pro rata by margin
    Amount per_maintainer;
    Amount remainder;              // stays in the free pool
};

/// Splits one interval's pool inflow. floor(fraction * inflow) is reserved
/// for the cohort and the rest is divided equally among maintainers; with an
/// empty cohort nothing is reserved and maintainers divide all of it. Always
/// earmark + maintainers * per_maintainer + remainder == inflow.
RewardSplit split_rewards(const Amount& inflow, const Fraction& fraction, std::span<const Amount> cohort_margins,
                          std::uint64_t maintainers);

struct PolicyBounds {
    std::uint64_t gpl_min = 10;
    std::uint64_t gpl_max = 10'000;
    Fraction i_min{1, 10'000};
    Fraction i_max{4, 5};
};

/// One regression sample: the controls and observations of interval X and the
/// ratio that followed at X+1.
struct PolicyRecord {
    double gpl = 0;
    double gn = 0;
    double i = 0;
    double ratio = 0;
    double next_ratio = 0;
};

struct PolicyDecision {
    std::uint64_t gpl = 0;
    Fraction i;
    /// Intercept, GPL, GN, I, ratio.
    std::array<double, 5> coefficients{};
    /// Fitted |target - ratio| at the chosen controls.
    double predicted = 0.0;
    bool regularized = false;
};

/// Fits |target - next_ratio| as a linear function of (GPL, GN, I, ratio) by
/// least squares (ridge penalty `ridge` on the slopes, intercept free), then
/// picks the GPL and I that minimise the fit with GN and ratio held at their
/// current values. The fit is linear in both controls, so each goes to the
/// bound its coefficient's sign favours; a zero coefficient keeps the current
/// value. When the normal equations are singular a penalty of 1e-8 is added.
PolicyDecision fit_policy(std::span<const PolicyRecord> history, double target, double gn_now, double ratio_now,
                          std::uint64_t gpl_now, const Fraction& i_now, const PolicyBounds& bounds,
                          double ridge = 0.0);

/// Rolling controller state: current controls, the Q window behind AVGQ and
/// the regression history.
class PolicyState {
public:
    struct Params {
        double target_ratio = 2.0;
        Fraction usage{13, 1000};
        std::size_t avgq_window = 50;
        std::size_t history_window = 100;
        std::uint64_t warmup = 10;
        std::uint64_t initial_gpl = 10;
        Fraction initial_i{1, 10};
        Fraction initial_avq{5'000'000};
        PolicyBounds bounds;
        double ridge = 0.0;
    };

    explicit PolicyState(Params params);

    const Params& params() const { return params_; }
    std::uint64_t gpl() const { return gpl_; }
    const Fraction& i() const { return i_; }
    const std::deque<PolicyRecord>& history() const { return history_; }

    /// AVGQ after `height` intervals: the configured initial value during
    /// warmup, then the mean of the last min(window, height) observations.
    Fraction average_lines(Height height) const;

    /// Records interval `height`'s outcome and returns the price for the next
    /// interval. Refits GPL and I once `height` reaches the warmup length.
    Amount close_interval(Height height, std::uint64_t lines_executed, const Amount& m2, std::uint64_t gn,
                          double ratio);

private:
    Params params_;
    std::uint64_t gpl_;
    Fraction i_;
    std::deque<std::uint64_t> lines_;
    std::deque<PolicyRecord> history_;
    bool have_previous_ = false;
    PolicyRecord previous_;
};

}  // namespace shardecon
