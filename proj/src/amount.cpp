#include "shardecon/amount.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace shardecon {

namespace {

bool is_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (c < '0' || c > '9')
            return false;
    return true;
}

mpz_class pow10(unsigned long exponent)
{
    mpz_class result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
    return result;
}

}  // namespace

Fraction parse_fraction(std::string_view text)
{
    auto fail = [&]() -> Fraction {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    };
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (text.empty())
        return fail();

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Fraction num = parse_fraction(text.substr(0, slash));
        Fraction den = parse_fraction(text.substr(slash + 1));
        if (sgn(den) == 0)
            return fail();
        Fraction q = num / den;
        q.canonicalize();
        return q;
    }

    bool negative = false;
    if (text.front() == '-' || text.front() == '+') {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }

    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_text = text.substr(e + 1);
        bool exp_negative = false;
        if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
            exp_negative = exp_text.front() == '-';
            exp_text.remove_prefix(1);
        }
        if (!is_digits(exp_text) || exp_text.size() > 6)
            return fail();
        exponent = std::stol(std::string(exp_text));
        if (exp_negative)
            exponent = -exponent;
        text = text.substr(0, e);
    }

    std::string_view int_part = text;
    std::string_view frac_part;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        int_part = text.substr(0, dot);
        frac_part = text.substr(dot + 1);
    }
    if (int_part.empty() && frac_part.empty())
        return fail();
    if ((!int_part.empty() && !is_digits(int_part)) || (!frac_part.empty() && !is_digits(frac_part)))
        return fail();

    std::string digits = std::string(int_part) + std::string(frac_part);
    mpz_class mantissa(digits, 10);
    exponent -= static_cast<long>(frac_part.size());

    Fraction q;
    if (exponent >= 0)
        q = Fraction(mantissa * pow10(static_cast<unsigned long>(exponent)));
    else
        q = Fraction(mantissa, pow10(static_cast<unsigned long>(-exponent)));
    q.canonicalize();
    if (negative)
        q = -q;
    return q;
}

std::string format_real(double value)
{
    if (std::isinf(value))
        return value < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string format_real(const Fraction& value) { return format_real(value.get_d()); }

Amount::Amount(mpz_class value) : value_(std::move(value))
{
    if (sgn(value_) < 0)
        throw std::domain_error("negative amount " + value_.get_str());
}

mpz_class Amount::units_to_mpz(std::uint64_t units)
{
    if constexpr (sizeof(unsigned long) >= sizeof(std::uint64_t)) {
        return mpz_class(static_cast<unsigned long>(units));
    } else {
        // LLP64: mpz_class has no 64-bit constructor there.
        mpz_class v;
        mpz_import(v.get_mpz_t(), 1, 1, sizeof units, 0, 0, &units);
        return v;
    }
}

Amount Amount::parse(std::string_view text)
{
    if (!is_digits(text))
        throw std::invalid_argument("not a nonnegative integer amount: '" + std::string(text) + "'");
    return Amount(mpz_class(std::string(text), 10));
}

bool Amount::fits_u64() const { return mpz_sizeinbase(value_.get_mpz_t(), 2) <= 64; }

std::uint64_t Amount::to_u64() const
{
    if (!fits_u64())
        throw std::overflow_error("amount exceeds 64 bits: " + str());
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, 1, sizeof out, 0, 0, value_.get_mpz_t());
    return out;
}

Amount& Amount::operator-=(const Amount& other)
{
    if (cmp(value_, other.value_) < 0)
        throw std::domain_error("amount underflow: " + str() + " - " + other.str());
    value_ -= other.value_;
    return *this;
}

Amount operator*(const Amount& lhs, std::uint64_t factor)
{
    return Amount(mpz_class(lhs.value_ * Amount(factor).value_));
}

Amount operator/(const Amount& lhs, std::uint64_t divisor)
{
    if (divisor == 0)
        throw std::domain_error("division of amount by zero");
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), lhs.value_.get_mpz_t(), Amount(divisor).value_.get_mpz_t());
    return Amount(std::move(q));
}

Amount floor_mul(const Fraction& fraction, const Amount& amount)
{
    if (sgn(fraction) < 0)
        throw std::domain_error("negative fraction");
    mpz_class num = fraction.get_num() * amount.value();
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), fraction.get_den_mpz_t());
    return Amount(std::move(q));
}

Amount floor_ratio(const Amount& amount, const Amount& numerator, const Amount& denominator)
{
    if (denominator.is_zero())
        throw std::domain_error("zero denominator");
    mpz_class num = amount.value() * numerator.value();
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), denominator.value().get_mpz_t());
    return Amount(std::move(q));
}

}  // namespace shardecon
