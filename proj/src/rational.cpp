#include "nfatk/rational.hpp"

#include <stdexcept>
#include <vector>

namespace nfatk {

namespace {

std::uint64_t rejection_draw(RandomStream& rng, std::uint64_t bound) {
    // Masked rejection keeps the draw unbiased for any bound.
    std::uint64_t mask = ~0ULL;
    if (bound > 1) {
        int bits = 64 - __builtin_clzll(bound - 1);
        mask = (bits == 64) ? ~0ULL : ((1ULL << bits) - 1);
    } else {
        return 0;
    }
    for (;;) {
        std::uint64_t x = rng.next_u64() & mask;
        if (x < bound) return x;
    }
}

} // namespace

std::uint64_t RandomStream::uniform_below_u64(std::uint64_t bound) {
    return rejection_draw(*this, bound);
}

BigRational::BigRational(const BigInt& num, const BigInt& den) {
    if (den.is_zero()) throw std::invalid_argument("BigRational: zero denominator");
    v_ = mpq_class(num.raw(), den.raw());
    v_.canonicalize();
}

BigRational BigRational::operator/(const BigRational& o) const {
    if (o.is_zero()) throw std::invalid_argument("BigRational: division by zero");
    return wrap(v_ / o.v_);
}

BigRational BigRational::parse(const std::string& text) {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        return BigRational(num, den);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::size_t frac_len = text.size() - dot - 1;
        if (digits.empty() || frac_len == 0) throw std::invalid_argument("bad rational: " + text);
        BigInt num(digits);
        BigInt den = BigInt::pow(BigInt(10), frac_len);
        return BigRational(num, den);
    }
    return BigRational(BigInt(text));
}

BigInt BigRational::round_nearest() const {
    // floor((2*num + den) / (2*den)) rounds to nearest, ties up.
    mpz_class num2 = 2 * v_.get_num() + v_.get_den();
    mpz_class den2 = 2 * v_.get_den();
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), num2.get_mpz_t(), den2.get_mpz_t());
    return BigInt(q);
}

std::string BigRational::str() const {
    if (v_.get_den() == 1) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

BigInt uniform_below(RandomStream& rng, const BigInt& bound) {
    if (bound <= BigInt(0)) throw std::invalid_argument("uniform_below: bound must be positive");
    if (bound.raw().fits_ulong_p()) {
        return BigInt(static_cast<unsigned long>(rejection_draw(rng, bound.raw().get_ui())));
    }
    std::size_t bits = bound.bit_length();
    std::size_t words = (bits + 63) / 64;
    std::vector<std::uint64_t> buf(words);
    for (;;) {
        for (auto& w : buf) w = rng.next_u64();
        // Trim to exactly `bits` so the acceptance rate stays above 1/2.
        std::size_t excess = words * 64 - bits;
        if (excess > 0) buf.back() >>= excess;
        mpz_class x;
        mpz_import(x.get_mpz_t(), words, -1 /*lsw first*/, sizeof(std::uint64_t), 0, 0, buf.data());
        if (x < bound.raw()) return BigInt(x);
    }
}

bool bernoulli(RandomStream& rng, const BigRational& p) {
    if (p <= BigRational(0)) return false;
    if (p >= BigRational(1)) return true;
    BigInt draw = uniform_below(rng, p.denominator());
    return draw < p.numerator();
}

} // namespace nfatk
