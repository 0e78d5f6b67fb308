#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace cakg {

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace detail

// xsd:decimal lexical grammar: sign, digits with optional fraction, at least
// one digit overall ("25", "25.", ".5", "-0.25").
inline bool is_decimal_lexical(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == '+' || s.front() == '-') s.remove_prefix(1);
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return detail::all_digits(s);
  std::string_view intpart = s.substr(0, dot);
  std::string_view frac = s.substr(dot + 1);
  if (intpart.empty() && frac.empty()) return false;
  if (!intpart.empty() && !detail::all_digits(intpart)) return false;
  if (!frac.empty() && !detail::all_digits(frac)) return false;
  return true;
}

inline bool is_integer_lexical(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == '+' || s.front() == '-') s.remove_prefix(1);
  return detail::all_digits(s);
}

// Exact value comparison of two decimal lexical forms, any precision.
// Returns <0, 0, >0. Inputs must satisfy is_decimal_lexical.
inline int compare_decimal_lexicals(std::string_view a, std::string_view b) {
  struct Parts {
    bool neg = false;
    std::string_view ip, fp;
  };
  auto split = [](std::string_view s) {
    Parts p;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
      p.neg = s.front() == '-';
      s.remove_prefix(1);
    }
    auto dot = s.find('.');
    p.ip = s.substr(0, dot == std::string_view::npos ? s.size() : dot);
    p.fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    while (!p.ip.empty() && p.ip.front() == '0') p.ip.remove_prefix(1);
    while (!p.fp.empty() && p.fp.back() == '0') p.fp.remove_suffix(1);
    if (p.ip.empty() && p.fp.empty()) p.neg = false;  // -0 == 0
    return p;
  };
  Parts pa = split(a), pb = split(b);
  bool za = pa.ip.empty() && pa.fp.empty();
  bool zb = pb.ip.empty() && pb.fp.empty();
  if (za && zb) return 0;
  if (pa.neg != pb.neg) return pa.neg ? -1 : 1;
  int sign = pa.neg ? -1 : 1;
  // magnitude compare
  if (pa.ip.size() != pb.ip.size())
    return pa.ip.size() < pb.ip.size() ? -sign : sign;
  if (int c = pa.ip.compare(pb.ip); c != 0) return c < 0 ? -sign : sign;
  std::size_t n = std::max(pa.fp.size(), pb.fp.size());
  for (std::size_t i = 0; i < n; ++i) {
    char ca = i < pa.fp.size() ? pa.fp[i] : '0';
    char cb = i < pb.fp.size() ? pb.fp[i] : '0';
    if (ca != cb) return ca < cb ? -sign : sign;
  }
  return 0;
}

// Fixed-point decimal with 6 fractional digits, used for aggregate and
// statistics arithmetic. Parsing rounds half-even past the sixth digit.
class Decimal {
 public:
  static constexpr int kScale = 6;
  static constexpr std::int64_t kOne = 1000000;

  Decimal() = default;

  static Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }

  static std::optional<Decimal> parse(std::string_view s) {
    if (!is_decimal_lexical(s)) return std::nullopt;
    bool neg = false;
    if (s.front() == '+' || s.front() == '-') {
      neg = s.front() == '-';
      s.remove_prefix(1);
    }
    auto dot = s.find('.');
    std::string_view ip = s.substr(0, dot == std::string_view::npos ? s.size() : dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);

    __int128 units = 0;
    for (char c : ip) {
      units = units * 10 + (c - '0');
      if (units > kMaxMagnitude) return std::nullopt;
    }
    units *= kOne;
    if (units > kMaxUnits) return std::nullopt;
    std::int64_t frac = 0;
    for (int i = 0; i < kScale; ++i)
      frac = frac * 10 + (i < static_cast<int>(fp.size()) ? fp[i] - '0' : 0);
    units += frac;
    // round half-even on remaining digits
    if (fp.size() > kScale) {
      char first = fp[kScale];
      bool rest_nonzero = false;
      for (std::size_t i = kScale + 1; i < fp.size(); ++i)
        if (fp[i] != '0') {
          rest_nonzero = true;
          break;
        }
      if (first > '5' || (first == '5' && rest_nonzero) ||
          (first == '5' && !rest_nonzero && (units & 1)))
        units += 1;
    }
    if (units > kMaxUnits) return std::nullopt;
    std::int64_t v = static_cast<std::int64_t>(units);
    return from_units(neg ? -v : v);
  }

  std::int64_t units() const { return units_; }

  // Canonical form: minimal digits, at least one fractional digit ("3.0").
  std::string to_lexical() const {
    std::int64_t u = units_;
    bool neg = u < 0;
    unsigned long long mag = neg ? 0ULL - static_cast<unsigned long long>(u)
                                 : static_cast<unsigned long long>(u);
    unsigned long long ip = mag / kOne;
    unsigned long long fp = mag % kOne;
    std::string frac = std::to_string(fp);
    frac.insert(0, kScale - frac.size(), '0');
    while (frac.size() > 1 && frac.back() == '0') frac.pop_back();
    std::string out;
    if (neg && mag != 0) out += '-';
    out += std::to_string(ip);
    out += '.';
    out += frac;
    return out;
  }

  friend Decimal operator+(Decimal a, Decimal b) {
    return from_units(a.units_ + b.units_);
  }
  friend Decimal operator-(Decimal a, Decimal b) {
    return from_units(a.units_ - b.units_);
  }
  Decimal operator-() const { return from_units(-units_); }

  auto operator<=>(const Decimal&) const = default;

  // (this * num) / den with round-half-even, exact in 128-bit intermediates.
  Decimal mul_div_half_even(std::int64_t num, std::int64_t den) const {
    return from_units(div_half_even(static_cast<__int128>(units_) * num, den));
  }

  // this / den with round-half-even.
  Decimal div_half_even_by(std::int64_t den) const {
    return from_units(div_half_even(units_, den));
  }

  static std::int64_t div_half_even(__int128 num, std::int64_t den) {
    bool neg = (num < 0) != (den < 0);
    unsigned __int128 n = num < 0 ? -(unsigned __int128)num : (unsigned __int128)num;
    unsigned __int128 d = den < 0 ? -(unsigned __int128)den : (unsigned __int128)den;
    unsigned __int128 q = n / d;
    unsigned __int128 r = n % d;
    unsigned __int128 twice = r * 2;
    if (twice > d || (twice == d && (q & 1))) q += 1;
    std::int64_t out = static_cast<std::int64_t>(q);
    return neg ? -out : out;
  }

 private:
  static constexpr __int128 kMaxMagnitude = static_cast<__int128>(1) << 62;
  static constexpr __int128 kMaxUnits =
      static_cast<__int128>(INT64_MAX) - kOne;

  std::int64_t units_ = 0;
};

}  // namespace cakg
