#ifndef NFATK_RATIONAL_HPP
#define NFATK_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>

#include "nfatk/rng.hpp"

namespace nfatk {

/// Arbitrary-precision integer. Thin value wrapper around GMP's mpz_class;
/// counts in this library reach 2^n, so fixed-width arithmetic is never used.
class BigInt {
public:
    BigInt() : v_(0) {}
    BigInt(long v) : v_(v) {}                    // NOLINT(google-explicit-constructor)
    BigInt(unsigned long v) : v_(v) {}           // NOLINT(google-explicit-constructor)
    BigInt(int v) : v_(static_cast<long>(v)) {}  // NOLINT(google-explicit-constructor)
    explicit BigInt(const std::string& decimal) : v_(decimal, 10) {}
    explicit BigInt(mpz_class v) : v_(std::move(v)) {}

    static BigInt pow2(unsigned long n) {
        mpz_class r;
        mpz_ui_pow_ui(r.get_mpz_t(), 2, n);
        return BigInt(r);
    }
    static BigInt pow(const BigInt& base, unsigned long e) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), base.v_.get_mpz_t(), e);
        return BigInt(r);
    }

    BigInt operator+(const BigInt& o) const { return BigInt(mpz_class(v_ + o.v_)); }
    BigInt operator-(const BigInt& o) const { return BigInt(mpz_class(v_ - o.v_)); }
    BigInt operator*(const BigInt& o) const { return BigInt(mpz_class(v_ * o.v_)); }
    BigInt& operator+=(const BigInt& o) { v_ += o.v_; return *this; }

    bool operator==(const BigInt& o) const { return v_ == o.v_; }
    bool operator!=(const BigInt& o) const { return v_ != o.v_; }
    bool operator<(const BigInt& o) const { return v_ < o.v_; }
    bool operator<=(const BigInt& o) const { return v_ <= o.v_; }
    bool operator>(const BigInt& o) const { return v_ > o.v_; }
    bool operator>=(const BigInt& o) const { return v_ >= o.v_; }

    bool is_zero() const { return v_ == 0; }
    std::string str() const { return v_.get_str(); }
    double to_double() const { return v_.get_d(); }
    std::uint64_t to_u64() const { return static_cast<std::uint64_t>(v_.get_ui()); }
    std::size_t bit_length() const { return mpz_sizeinbase(v_.get_mpz_t(), 2); }

    const mpz_class& raw() const { return v_; }

private:
    mpz_class v_;
};

/// Arbitrary-precision rational, always in canonical reduced form with a
/// positive denominator. All approximation estimates and sampling probabilities are
/// values of this type; arithmetic is exact and closed under +, -, *, /.
class BigRational {
public:
    BigRational() : v_(0) {}
    BigRational(long v) : v_(v) {}  // NOLINT(google-explicit-constructor)
    BigRational(const BigInt& num, const BigInt& den);
    explicit BigRational(const BigInt& num) : v_(num.raw()) {}

    /// Parses "num/den" or a bare integer; also accepts decimal literals
    /// like "0.3" (exactly 3/10). Throws std::invalid_argument on junk.
    static BigRational parse(const std::string& text);

    BigRational operator+(const BigRational& o) const { return wrap(v_ + o.v_); }
    BigRational operator-(const BigRational& o) const { return wrap(v_ - o.v_); }
    BigRational operator*(const BigRational& o) const { return wrap(v_ * o.v_); }
    BigRational operator/(const BigRational& o) const;
    BigRational& operator+=(const BigRational& o) { v_ += o.v_; return *this; }
    BigRational& operator*=(const BigRational& o) { v_ *= o.v_; return *this; }

    bool operator==(const BigRational& o) const { return v_ == o.v_; }
    bool operator!=(const BigRational& o) const { return v_ != o.v_; }
    bool operator<(const BigRational& o) const { return v_ < o.v_; }
    bool operator<=(const BigRational& o) const { return v_ <= o.v_; }
    bool operator>(const BigRational& o) const { return v_ > o.v_; }
    bool operator>=(const BigRational& o) const { return v_ >= o.v_; }

    bool is_zero() const { return v_ == 0; }
    BigInt numerator() const { return BigInt(mpz_class(v_.get_num())); }
    BigInt denominator() const { return BigInt(mpz_class(v_.get_den())); }

    /// Nearest integer, ties rounded up.
    BigInt round_nearest() const;

    /// Absolute value.
    BigRational abs() const { return wrap(::abs(v_)); }

    /// "num/den" (or bare integer when den == 1).
    std::string str() const;

    double to_double() const { return v_.get_d(); }

private:
    static BigRational wrap(mpq_class q) {
        BigRational r;
        r.v_ = std::move(q);
        return r;  // mpq arithmetic results are already canonical
    }
    mpq_class v_;
};

/// Uniform BigInt in [0, bound), bound > 0, by rejection on bound's bit
/// length; consumes 64-bit blocks from the stream. Deterministic per stream.
BigInt uniform_below(RandomStream& rng, const BigInt& bound);

/// Exact Bernoulli(p) for p = a/b in [0,1]: draws uniform below b and
/// compares against a. Never touches floating point.
bool bernoulli(RandomStream& rng, const BigRational& p);

} // namespace nfatk

#endif
