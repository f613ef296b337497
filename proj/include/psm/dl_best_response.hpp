#pragma once

#include <psm/compare.hpp>
#include <psm/ps.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace psm {

/// L_i: the stingy response over the manipulator's i most preferred houses.
struct PartialResponse {
  HouseList list;
  std::size_t round = 0;
  Allocation alloc;
};

struct DlBestResponse {
  HouseList report;
  FractionalAssignment assignment;
  /// rounds[i - 1] holds L_i.
  std::vector<PartialResponse> rounds;
};

namespace detail {

inline std::vector<std::size_t> ranks_of(std::span<const House> order, std::size_t m) {
  std::vector<std::size_t> rank(m, m);
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = k;
  return rank;
}

// Unset start times (never eaten) sort last.
inline bool est_before(const std::optional<Rational>& a, const std::optional<Rational>& b) {
  if (!a) return false;
  if (!b) return true;
  return *a < *b;
}

inline bool est_at_most(const std::optional<Rational>& a, const std::optional<Rational>& b) {
  if (!b) return true;
  if (!a) return false;
  return *a <= *b;
}

inline bool in_open_unit(const Rational& x) { return sgn(x) > 0 && x < 1; }

/// Last 1-based position of `list` whose house is received partially; 0 if none.
inline std::size_t last_partial_position(std::span<const House> list, const Allocation& alloc) {
  std::size_t p = 0;
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (in_open_unit(alloc[list[k]])) p = k + 1;
  }
  return p;
}

inline void check_true_pref(const AssignmentProblem& problem, std::span<const House> true_pref) {
  if (!is_permutation_of_range(true_pref, problem.num_houses())) {
    throw InputError("the manipulator's true preference must rank every house exactly once");
  }
}

}  // namespace detail

/// Orders `candidates` by eating start time when the manipulator reports
/// `prefix`; ties go to the house the manipulator truly prefers.
inline HouseList stingy_order(std::span<const House> prefix, std::span<const House> candidates,
                              const AssignmentProblem& problem, std::span<const House> true_pref) {
  detail::check_true_pref(problem, true_pref);
  detail::check_list(prefix, problem.num_houses(), "prefix");
  detail::check_list(candidates, problem.num_houses(), "candidates");
  for (const House h : candidates) {
    if (std::find(prefix.begin(), prefix.end(), h) != prefix.end()) {
      throw InputError("candidate " + problem.house_name(h) + " already in the prefix");
    }
  }
  const auto rank = detail::ranks_of(true_pref, problem.num_houses());
  const auto start = est_with_report(problem, prefix);
  HouseList out(candidates.begin(), candidates.end());
  std::sort(out.begin(), out.end(), [&](House a, House b) {
    if (detail::est_before(start[a], start[b])) return true;
    if (detail::est_before(start[b], start[a])) return false;
    return rank[a] < rank[b];
  });
  return out;
}

/// L_i^q: keep the first q-1 houses of `prev`, put `new_house` at position q,
/// then refill the remaining positions of `prev` greedily by stingy order.
/// Returns `prev.list` unchanged when the manipulator would get none of
/// `new_house`.
inline HouseList insert_candidate(const PartialResponse& prev, House new_house, std::size_t q,
                                  const AssignmentProblem& problem,
                                  std::span<const House> true_pref) {
  detail::check_true_pref(problem, true_pref);
  const std::size_t p = detail::last_partial_position(prev.list, prev.alloc);
  if (q <= p || q > prev.list.size() + 1) {
    throw std::out_of_range("insertion position " + std::to_string(q) + " outside (" +
                            std::to_string(p) + ", " + std::to_string(prev.list.size() + 1) + "]");
  }
  if (std::find(prev.list.begin(), prev.list.end(), new_house) != prev.list.end()) {
    throw InputError("house " + problem.house_name(new_house) + " is already listed");
  }
  const auto rank = detail::ranks_of(true_pref, problem.num_houses());

  HouseList list(prev.list.begin(), prev.list.begin() + static_cast<std::ptrdiff_t>(q - 1));
  list.push_back(new_house);
  std::vector<bool> placed(problem.num_houses(), false);
  for (const House h : list) placed[h] = true;

  while (list.size() <= prev.list.size()) {
    const auto start = est_with_report(problem, list);
    std::optional<House> best;
    for (const House h : prev.list) {
      if (placed[h]) continue;
      if (!best || detail::est_before(start[h], start[*best]) ||
          (!detail::est_before(start[*best], start[h]) && rank[h] < rank[*best])) {
        best = h;
      }
    }
    list.push_back(*best);
    placed[*best] = true;
  }

  if (sgn(ps1(list, problem)[new_house]) == 0) return prev.list;
  return list;
}

/// Stingy DL best response of the manipulator, built one house at a time in
/// order of `true_pref`.
inline DlBestResponse dl_best_response(const AssignmentProblem& problem,
                                       std::span<const House> true_pref) {
  detail::check_true_pref(problem, true_pref);
  const std::size_t m = problem.num_houses();
  DlBestResponse result;
  if (m == 0) {
    result.assignment = ps_with_report(problem, HouseList{}).assignment;
    return result;
  }

  PartialResponse current{{true_pref[0]}, 1, {}};
  current.alloc = ps1(current.list, problem);
  result.rounds.push_back(current);

  struct Candidate {
    HouseList list;
    Allocation alloc;
  };

  for (std::size_t i = 1; i < m; ++i) {
    const House fresh = true_pref[i];
    const auto earlier = true_pref.first(i);
    const std::size_t p = detail::last_partial_position(current.list, current.alloc);
    const std::size_t last = current.list.size() + 1;

    std::map<std::size_t, Candidate> cache;
    const auto candidate = [&](std::size_t q) -> const Candidate& {
      auto it = cache.find(q);
      if (it == cache.end()) {
        HouseList list = insert_candidate(current, fresh, q, problem, true_pref);
        Allocation alloc = ps1(list, problem);
        it = cache.emplace(q, Candidate{std::move(list), std::move(alloc)}).first;
      }
      return it->second;
    };

    // worse[q]: L_i^q changes the shares of houses in H_{i-1}. Slot p is a
    // sentinel that is always true.
    std::map<std::size_t, bool> worse{{p, true}};
    std::size_t q = p + 1;
    bool keep_previous = false;
    for (;;) {
      if (q > last) throw std::logic_error("dl_best_response: insertion scan overran the list");
      const Candidate& c = candidate(q);
      const bool changed = std::any_of(earlier.begin(), earlier.end(),
                                       [&](House h) { return c.alloc[h] != current.alloc[h]; });
      if (changed) {
        worse[q] = true;
        ++q;
        continue;
      }
      worse[q] = false;
      const Rational& share = c.alloc[fresh];
      if (detail::in_open_unit(share)) {
        if (!worse.at(q - 1)) --q;
        break;
      }
      if (sgn(share) == 0) {
        keep_previous = true;
        break;
      }
      // Full share: accept q only if `fresh` is strictly first in the stingy
      // order behind the prefix of length q-1.
      const auto start = est_with_report(problem, std::span(c.list).first(q - 1));
      const bool overtaken =
          std::any_of(c.list.begin() + static_cast<std::ptrdiff_t>(q), c.list.end(),
                      [&](House h) { return detail::est_at_most(start[h], start[fresh]); });
      if (!overtaken) break;
      ++q;
    }

    if (!keep_previous) {
      const Candidate& chosen = candidate(q);
      current.list = chosen.list;
      current.alloc = chosen.alloc;
    }
    current.round = i + 1;
    result.rounds.push_back(current);
  }

  result.report = current.list;
  result.assignment = ps_with_report(problem, result.report).assignment;
  return result;
}

/// Uses the manipulator's listed preference as his true preference.
inline DlBestResponse dl_best_response(const AssignmentProblem& problem) {
  return dl_best_response(problem, problem.pref(kManipulator));
}

/// A DL best response is never SD-dominated, so it doubles as an SD best response.
inline HouseList sd_best_response(const AssignmentProblem& problem,
                                  std::span<const House> true_pref) {
  return dl_best_response(problem, true_pref).report;
}

}  // namespace psm
