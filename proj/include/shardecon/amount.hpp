#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace shardecon {

/// Exact rational used for every configured fraction (U, I, thresholds,
/// budgets). Decimal config values are parsed into it without rounding.
using Fraction = mpq_class;

/// Parses "0.013", "1e-6", "3/7" or "42" into an exact rational.
Fraction parse_fraction(std::string_view text);

/// Renders a fraction as a real with 12 significant digits.
std::string format_real(const Fraction& value);
std::string format_real(double value);

/// A nonnegative quantity of money in integer base units.
///
/// Arithmetic is arbitrary precision; any operation that would produce a
/// negative amount throws std::domain_error instead.
class Amount {
public:
    Amount() = default;
    Amount(std::uint64_t units) : value_(units_to_mpz(units)) {}
    explicit Amount(mpz_class value);

    static Amount parse(std::string_view text);

    const mpz_class& value() const { return value_; }
    bool is_zero() const { return sgn(value_) == 0; }
    bool fits_u64() const;
    std::uint64_t to_u64() const;
    double to_double() const { return value_.get_d(); }
    std::string str() const { return value_.get_str(); }

    Amount& operator+=(const Amount& other)
    {
        value_ += other.value_;
        return *this;
    }
    Amount& operator-=(const Amount& other);

    friend Amount operator+(Amount lhs, const Amount& rhs) { return lhs += rhs; }
    friend Amount operator-(Amount lhs, const Amount& rhs) { return lhs -= rhs; }
    friend Amount operator*(const Amount& lhs, std::uint64_t factor);

    /// Floor division by a positive integer.
    friend Amount operator/(const Amount& lhs, std::uint64_t divisor);

    friend bool operator==(const Amount& lhs, const Amount& rhs) { return cmp(lhs.value_, rhs.value_) == 0; }
    friend std::strong_ordering operator<=>(const Amount& lhs, const Amount& rhs)
    {
        const int c = cmp(lhs.value_, rhs.value_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    static mpz_class units_to_mpz(std::uint64_t units);

    mpz_class value_;
};

/// floor(fraction * amount); the fraction must be nonnegative.
Amount floor_mul(const Fraction& fraction, const Amount& amount);

/// floor(amount * numerator / denominator) with denominator > 0.
Amount floor_ratio(const Amount& amount, const Amount& numerator, const Amount& denominator);

}  // namespace shardecon
