#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "setplan/error.hpp"

namespace setplan {

// Exact rational number on 128-bit integers, always kept normalized
// (gcd(num, den) == 1, den > 0). Objectives and coverage fractions are
// linear combinations of terms like 1/|I+| and 1/|I-|, so denominators
// stay lcm-bounded by a handful of values; 128 bits leaves ample headroom.
// Overflow is still checked and reported rather than wrapped.
class Rational {
public:
    using Int = __int128;

    constexpr Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    static Rational from_int128(Int n, Int d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        r.normalize();
        return r;
    }

    Int num() const { return num_; }
    Int den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    bool is_positive() const { return num_ > 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return from_raw(-num_, den_); }

    Rational operator+(const Rational& o) const {
        return from_int128(checked_add(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                           checked_mul(den_, o.den_));
    }
    Rational operator-(const Rational& o) const {
        return from_int128(checked_sub(checked_mul(num_, o.den_), checked_mul(o.num_, den_)),
                           checked_mul(den_, o.den_));
    }
    Rational operator*(const Rational& o) const {
        return from_int128(checked_mul(num_, o.num_), checked_mul(den_, o.den_));
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw Error(ErrorKind::Model, "rational division by zero");
        return from_int128(checked_mul(num_, o.den_), checked_mul(den_, o.num_));
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return checked_mul(num_, o.den_) < checked_mul(o.num_, den_);
    }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator>=(const Rational& o) const { return !(*this < o); }

    double to_double() const {
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }

    // "p/q" with q omitted for integers; exact, stable across platforms.
    std::string to_string() const {
        std::string s = int128_to_string(num_);
        if (den_ != 1) {
            s += '/';
            s += int128_to_string(den_);
        }
        return s;
    }

    // Decimal rendering with >= 15 significant digits, used by the LP writer.
    std::string to_decimal() const {
        long double v = static_cast<long double>(num_) / static_cast<long double>(den_);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.15Lg", v);
        return std::string(buf);
    }

    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) {
                return Rational(parse_i64(text));
            }
            return Rational(parse_i64(text.substr(0, slash)), parse_i64(text.substr(slash + 1)));
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw Error(ErrorKind::Data, "malformed rational: " + text);
        }
    }

    static std::string int128_to_string(Int v) {
        if (v == 0) return "0";
        bool neg = v < 0;
        unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
        char buf[48];
        int pos = 48;
        while (u > 0) {
            buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
            u /= 10;
        }
        std::string s(buf + pos, 48 - pos);
        return neg ? "-" + s : s;
    }

private:
    static Rational from_raw(Int n, Int d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        return r;
    }

    static std::int64_t parse_i64(const std::string& s) {
        if (s.empty()) throw Error(ErrorKind::Data, "empty rational component");
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw Error(ErrorKind::Data, "trailing characters in rational: " + s);
        return v;
    }

    static Int gcd128(Int a, Int b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            Int t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Int checked_mul(Int a, Int b) {
        Int r;
        if (__builtin_mul_overflow(a, b, &r))
            throw Error(ErrorKind::Model, "rational overflow in multiply");
        return r;
    }
    static Int checked_add(Int a, Int b) {
        Int r;
        if (__builtin_add_overflow(a, b, &r))
            throw Error(ErrorKind::Model, "rational overflow in add");
        return r;
    }
    static Int checked_sub(Int a, Int b) {
        Int r;
        if (__builtin_sub_overflow(a, b, &r))
            throw Error(ErrorKind::Model, "rational overflow in subtract");
        return r;
    }

    void normalize() {
        if (den_ == 0) throw Error(ErrorKind::Model, "rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        if (num_ == 0) {
            den_ = 1;
            return;
        }
        Int g = gcd128(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    Int num_;
    Int den_;
};

inline Rational operator*(std::int64_t a, const Rational& b) { return Rational(a) * b; }

}  // namespace setplan
