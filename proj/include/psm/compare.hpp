#pragma once

#include <psm/problem.hpp>

#include <span>
#include <string_view>

namespace psm {

enum class ComparisonResult { FirstPreferred, SecondPreferred, Equal, Incomparable };

inline std::string_view to_string(ComparisonResult r) {
  switch (r) {
    case ComparisonResult::FirstPreferred: return "first-preferred";
    case ComparisonResult::SecondPreferred: return "second-preferred";
    case ComparisonResult::Equal: return "equal";
    case ComparisonResult::Incomparable: return "incomparable";
  }
  return "?";
}

namespace detail {

inline void check_rows(std::span<const Rational> p, std::span<const Rational> q,
                       std::span<const House> pref) {
  if (p.size() != q.size()) throw InputError("allocations cover different house sets");
  if (!is_permutation_of_range(pref, p.size())) {
    throw InputError("preference must be a complete strict order over the allocation's houses");
  }
}

}  // namespace detail

/// Stochastic dominance: compares the running sums of both rows along `pref`.
inline ComparisonResult sd_compare(std::span<const Rational> p, std::span<const Rational> q,
                                   std::span<const House> pref) {
  detail::check_rows(p, q, pref);
  Rational sp = 0, sq = 0;
  bool p_ahead = false, q_ahead = false;
  for (const House h : pref) {
    sp += p[h];
    sq += q[h];
    if (sp > sq) p_ahead = true;
    if (sq > sp) q_ahead = true;
  }
  if (p_ahead && q_ahead) return ComparisonResult::Incomparable;
  if (p_ahead) return ComparisonResult::FirstPreferred;
  if (q_ahead) return ComparisonResult::SecondPreferred;
  return ComparisonResult::Equal;
}

/// Downward lexicographic: the most preferred house with differing shares decides.
inline ComparisonResult dl_compare(std::span<const Rational> p, std::span<const Rational> q,
                                   std::span<const House> pref) {
  detail::check_rows(p, q, pref);
  for (const House h : pref) {
    if (p[h] > q[h]) return ComparisonResult::FirstPreferred;
    if (p[h] < q[h]) return ComparisonResult::SecondPreferred;
  }
  return ComparisonResult::Equal;
}

inline Rational eu_value(std::span<const Rational> p, const UtilityFunction& u) {
  if (u.size() != p.size()) throw InputError("utility function does not cover every house");
  Rational total = 0;
  for (House h = 0; h < p.size(); ++h) total += u(h) * p[h];
  return total;
}

inline ComparisonResult eu_compare(std::span<const Rational> p, std::span<const Rational> q,
                                   const UtilityFunction& u) {
  const Rational a = eu_value(p, u), b = eu_value(q, u);
  if (a > b) return ComparisonResult::FirstPreferred;
  if (b > a) return ComparisonResult::SecondPreferred;
  return ComparisonResult::Equal;
}

}  // namespace psm
