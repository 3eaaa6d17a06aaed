#include "shardecon/monetary_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace shardecon {

MonetarySnapshot compute_aggregates(const Ledger& ledger, Height height, double neutral_ratio)
{
    MonetarySnapshot snap;
    snap.height = height;
    for (const auto& a : ledger.accounts())
        snap.m0 += a.balance;
    snap.m1 = snap.m0;
    for (const auto& c : ledger.contracts())
        snap.m1 += c.balance;
    snap.m2 = snap.m1 + ledger.margin_total();
    if (snap.m1.is_zero())
        snap.ratio = neutral_ratio;
    else
        snap.ratio = mpq_class(snap.m2.value(), snap.m1.value()).get_d();
    return snap;
}

Amount update_price(const Fraction& usage, const Amount& m2_prev, const Fraction& avg_lines)
{
    if (sgn(avg_lines) < 0)
        throw std::invalid_argument("average lines must be nonnegative");
    if (sgn(usage) < 0)
        throw std::invalid_argument("usage coefficient must be nonnegative");
    // usage * m2 / (avg + 1) == (un/ud) * m2 * ad / (an + ad)
    const mpz_class num = usage.get_num() * m2_prev.value() * avg_lines.get_den();
    const mpz_class den = usage.get_den() * (avg_lines.get_num() + avg_lines.get_den());
    mpz_class p;
    mpz_fdiv_q(p.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return Amount(std::move(p));
}

RewardSplit split_rewards(const Amount& inflow, const Fraction& fraction, std::span<const Amount> cohort_margins,
                          std::uint64_t maintainers)
{
    if (sgn(fraction) < 0 || cmp(fraction, 1) > 0)
        throw std::invalid_argument("compensation fraction must lie in [0, 1]");

    RewardSplit split;
    const Amount set_aside = floor_mul(fraction, inflow);
    const Amount cohort_total =
        std::accumulate(cohort_margins.begin(), cohort_margins.end(), Amount(), std::plus<>());

    split.shares.reserve(cohort_margins.size());
    if (!cohort_total.is_zero()) {
        split.earmark = set_aside;
        for (const auto& margin : cohort_margins)
            split.shares.push_back(floor_ratio(set_aside, margin, cohort_total));
    } else {
        split.shares.assign(cohort_margins.size(), Amount());
    }

    const Amount distributable = inflow - split.earmark;
    if (maintainers > 0)
        split.per_maintainer = distributable / maintainers;
    split.remainder = inflow - split.earmark - split.per_maintainer * maintainers;
    return split;
}

PolicyDecision fit_policy(std::span<const PolicyRecord> history, double target, double gn_now, double ratio_now,
                          std::uint64_t gpl_now, const Fraction& i_now, const PolicyBounds& bounds, double ridge)
{
    if (history.empty())
        throw std::invalid_argument("fit_policy needs at least one record");
    if (bounds.gpl_min > bounds.gpl_max || cmp(bounds.i_min, bounds.i_max) > 0)
        throw std::invalid_argument("inverted policy bounds");
    if (ridge < 0)
        throw std::invalid_argument("ridge penalty must be nonnegative");

    constexpr int k = 4;
    using Vec = Eigen::Matrix<double, k, 1>;
    using Mat = Eigen::Matrix<double, k, k>;

    auto features = [](const PolicyRecord& r) { return Vec(r.gpl, r.gn, r.i, r.ratio); };
    auto response = [target](const PolicyRecord& r) { return std::abs(target - r.next_ratio); };

    // Centre so the intercept is unpenalised. Shifting by the first sample
    // first keeps a constant column exactly zero. Sums run in history order.
    const double n = static_cast<double>(history.size());
    const Vec origin = features(history.front());
    Vec mean_x = Vec::Zero();
    double mean_y = 0;
    for (const auto& r : history) {
        mean_x += features(r) - origin;
        mean_y += response(r);
    }
    mean_x /= n;
    mean_y /= n;

    Mat gram = Mat::Zero();
    Vec moment = Vec::Zero();
    for (const auto& r : history) {
        const Vec dx = features(r) - origin - mean_x;
        gram.noalias() += dx * dx.transpose();
        moment += dx * (response(r) - mean_y);
    }
    mean_x += origin;

    PolicyDecision out;
    double lambda = ridge;
    Eigen::ColPivHouseholderQR<Mat> qr(gram + lambda * Mat::Identity());
    if (qr.rank() < k) {
        lambda += 1e-8;
        out.regularized = true;
        qr.compute(gram + lambda * Mat::Identity());
    }
    Vec beta = qr.solve(moment);
    // Columns with no spread carry no information; pin their slope at zero.
    for (int j = 0; j < k; ++j)
        if (gram(j, j) == 0.0)
            beta(j) = 0.0;

    out.coefficients = {mean_y - beta.dot(mean_x), beta(0), beta(1), beta(2), beta(3)};
    const double gpl_slope = beta(0);
    const double i_slope = beta(2);

    if (gpl_slope > 0)
        out.gpl = bounds.gpl_min;
    else if (gpl_slope < 0)
        out.gpl = bounds.gpl_max;
    else
        out.gpl = std::clamp(gpl_now, bounds.gpl_min, bounds.gpl_max);

    if (i_slope > 0)
        out.i = bounds.i_min;
    else if (i_slope < 0)
        out.i = bounds.i_max;
    else if (cmp(i_now, bounds.i_min) < 0)
        out.i = bounds.i_min;
    else if (cmp(i_now, bounds.i_max) > 0)
        out.i = bounds.i_max;
    else
        out.i = i_now;

    out.predicted = out.coefficients[0] + beta(0) * static_cast<double>(out.gpl) + beta(1) * gn_now +
                    beta(2) * out.i.get_d() + beta(3) * ratio_now;
    return out;
}

PolicyState::PolicyState(Params params)
    : params_(std::move(params)), gpl_(params_.initial_gpl), i_(params_.initial_i)
{
    if (params_.avgq_window == 0)
        throw std::invalid_argument("AVGQ window must be positive");
    if (params_.history_window < 2)
        throw std::invalid_argument("regression window must be at least 2");
}

Fraction PolicyState::average_lines(Height height) const
{
    if (height < params_.warmup || lines_.empty())
        return params_.initial_avq;
    mpz_class total;
    for (auto q : lines_)
        total += Amount(q).value();
    Fraction avg(total, mpz_class(static_cast<unsigned long>(lines_.size())));
    avg.canonicalize();
    return avg;
}

Amount PolicyState::close_interval(Height height, std::uint64_t lines_executed, const Amount& m2, std::uint64_t gn,
                                   double ratio)
{
    lines_.push_back(lines_executed);
    while (lines_.size() > params_.avgq_window)
        lines_.pop_front();

    // Samples X in [CH-100, CH-1) with CH = height + 1: the newest one pairs
    // interval height-1 with this interval's ratio.
    if (have_previous_) {
        previous_.next_ratio = ratio;
        history_.push_back(previous_);
        while (history_.size() > params_.history_window - 1)
            history_.pop_front();
    }
    previous_ = {static_cast<double>(gpl_), static_cast<double>(gn), i_.get_d(), ratio, 0.0};
    have_previous_ = true;

    if (height >= params_.warmup && !history_.empty()) {
        const std::vector<PolicyRecord> window(history_.begin(), history_.end());
        const PolicyDecision d = fit_policy(window, params_.target_ratio, static_cast<double>(gn), ratio, gpl_, i_,
                                            params_.bounds, params_.ridge);
        gpl_ = d.gpl;
        i_ = d.i;
    }

    return update_price(params_.usage, m2, average_lines(height));
}

}  // namespace shardecon
