#pragma once

#include <psm/compare.hpp>
#include <psm/ps.hpp>

#include <algorithm>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psm {

enum class Criterion { EU, DL, SD };

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::EU: return "eu";
    case Criterion::DL: return "dl";
    case Criterion::SD: return "sd";
  }
  return "?";
}

inline Criterion parse_criterion(std::string_view s) {
  if (s == "eu" || s == "EU") return Criterion::EU;
  if (s == "dl" || s == "DL") return Criterion::DL;
  if (s == "sd" || s == "SD") return Criterion::SD;
  throw InputError("unknown criterion '" + std::string(s) + "' (expected eu, dl or sd)");
}

struct OracleOptions {
  std::size_t cap = 8;
  bool force = false;
  unsigned jobs = 1;
  /// Also try every partial list when m <= partial_sweep_limit.
  std::size_t partial_sweep_limit = 5;
};

struct OracleReport {
  Criterion criterion = Criterion::DL;
  /// EU only.
  std::optional<Rational> best_value;
  /// The optimal allocation (EU, DL) or every SD-maximal allocation.
  std::vector<Allocation> best_allocations;
  /// Complete reports achieving an entry of best_allocations, lexicographic.
  std::vector<HouseList> optimal_reports;
  bool truthful_is_optimal = false;
  std::size_t reports_examined = 0;
  /// Set when the partial-list sweep ran: whether some partial list strictly
  /// beats an entry of best_allocations.
  std::optional<bool> partial_list_improves;
};

struct ReportOutcome {
  HouseList report;
  Allocation alloc;
};

namespace detail {

inline void check_cap(const AssignmentProblem& problem, const OracleOptions& opt) {
  if (problem.num_houses() > opt.cap && !opt.force) {
    throw InputError("brute force over " + std::to_string(problem.num_houses()) +
                     "! reports exceeds the cap of " + std::to_string(opt.cap) +
                     " houses; pass force to run anyway");
  }
}

inline std::vector<ReportOutcome> enumerate_chunk(const AssignmentProblem& problem, House first) {
  const std::size_t m = problem.num_houses();
  HouseList rest;
  for (House h = 0; h < m; ++h) {
    if (h != first) rest.push_back(h);
  }
  std::vector<ReportOutcome> out;
  HouseList report(m);
  do {
    report[0] = first;
    std::copy(rest.begin(), rest.end(), report.begin() + 1);
    out.push_back({report, ps1(report, problem)});
  } while (std::next_permutation(rest.begin(), rest.end()));
  return out;
}

/// Calls f(list) for every duplicate-free list shorter than m (including empty).
template <typename F>
void for_each_partial_list(std::size_t m, F&& f) {
  HouseList list;
  std::vector<bool> used(m, false);
  const auto rec = [&](const auto& self) -> void {
    if (list.size() < m) f(std::as_const(list));
    if (list.size() + 1 >= m) return;
    for (House h = 0; h < m; ++h) {
      if (used[h]) continue;
      used[h] = true;
      list.push_back(h);
      self(self);
      list.pop_back();
      used[h] = false;
    }
  };
  rec(rec);
}

}  // namespace detail

/// PS row of the manipulator for every complete report, in lexicographic
/// report order. Chunks by first house run on `jobs` threads; the output
/// order does not depend on the chunking.
inline std::vector<ReportOutcome> all_report_outcomes(const AssignmentProblem& problem,
                                                      const OracleOptions& opt = {}) {
  detail::check_cap(problem, opt);
  const std::size_t m = problem.num_houses();
  if (m == 0) return {{HouseList{}, Allocation{}}};

  std::vector<std::vector<ReportOutcome>> chunks(m);
  const unsigned jobs = std::max(1u, opt.jobs);
  for (House start = 0; start < m; start += jobs) {
    std::vector<std::future<std::vector<ReportOutcome>>> pending;
    for (House f = start; f < std::min<House>(m, start + jobs); ++f) {
      pending.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                   [&problem, f] { return detail::enumerate_chunk(problem, f); }));
    }
    for (std::size_t k = 0; k < pending.size(); ++k) chunks[start + k] = pending[k].get();
  }
  std::vector<ReportOutcome> all;
  for (auto& c : chunks) {
    std::move(c.begin(), c.end(), std::back_inserter(all));
  }
  return all;
}

/// Exhaustive best response of the manipulator, whose listed preference is
/// taken as his true one.
inline OracleReport brute_force_best_response(const AssignmentProblem& problem, Criterion criterion,
                                              const UtilityFunction* u = nullptr,
                                              const OracleOptions& opt = {}) {
  const HouseList& truth = problem.pref(kManipulator);
  if (!problem.is_complete(kManipulator)) {
    throw InputError("the oracle needs the manipulator's complete true preference");
  }
  if (criterion == Criterion::EU) {
    if (!u) throw InputError("the EU criterion needs a utility function");
    if (u->size() != problem.num_houses()) throw InputError("utility function size mismatch");
  }
  const auto outcomes = all_report_outcomes(problem, opt);
  const Allocation truthful = ps1(truth, problem);

  OracleReport rep;
  rep.criterion = criterion;
  rep.reports_examined = outcomes.size();

  // Does `a` strictly beat `b` under the criterion?
  const auto beats = [&](const Allocation& a, const Allocation& b) {
    switch (criterion) {
      case Criterion::EU: return eu_value(a, *u) > eu_value(b, *u);
      case Criterion::DL: return dl_compare(a, b, truth) == ComparisonResult::FirstPreferred;
      case Criterion::SD: return sd_compare(a, b, truth) == ComparisonResult::FirstPreferred;
    }
    return false;
  };

  if (criterion == Criterion::SD) {
    std::map<Allocation, std::vector<std::size_t>> distinct;
    for (std::size_t k = 0; k < outcomes.size(); ++k) distinct[outcomes[k].alloc].push_back(k);
    std::vector<const Allocation*> allocs;
    for (const auto& [a, idx] : distinct) allocs.push_back(&a);
    for (const auto& [a, idx] : distinct) {
      const bool dominated =
          std::any_of(allocs.begin(), allocs.end(), [&](const Allocation* b) { return beats(*b, a); });
      if (dominated) continue;
      rep.best_allocations.push_back(a);
      for (const auto k : idx) rep.optimal_reports.push_back(outcomes[k].report);
    }
    std::sort(rep.optimal_reports.begin(), rep.optimal_reports.end());
    rep.truthful_is_optimal =
        std::find(rep.best_allocations.begin(), rep.best_allocations.end(), truthful) !=
        rep.best_allocations.end();
  } else {
    const Allocation* best = &outcomes.front().alloc;
    for (const auto& o : outcomes) {
      if (beats(o.alloc, *best)) best = &o.alloc;
    }
    rep.best_allocations.push_back(*best);
    if (criterion == Criterion::EU) rep.best_value = eu_value(*best, *u);
    for (const auto& o : outcomes) {
      if (!beats(*best, o.alloc)) rep.optimal_reports.push_back(o.report);
    }
    rep.truthful_is_optimal = !beats(*best, truthful);
  }

  if (problem.num_houses() <= opt.partial_sweep_limit) {
    bool improves = false;
    detail::for_each_partial_list(problem.num_houses(), [&](const HouseList& list) {
      if (improves) return;
      const Allocation a = ps1(list, problem);
      improves = std::any_of(rep.best_allocations.begin(), rep.best_allocations.end(),
                             [&](const Allocation& b) { return beats(a, b); });
    });
    rep.partial_list_improves = improves;
  }
  return rep;
}

/// Per-agent flag: can the agent strictly improve on truth-telling while the
/// others stay truthful? `utilities[i]` is agent i's utility (EU only).
inline std::vector<bool> is_manipulable(const AssignmentProblem& problem, Criterion criterion,
                                        std::span<const UtilityFunction> utilities = {},
                                        const OracleOptions& opt = {}) {
  if (criterion == Criterion::EU && utilities.size() != problem.num_agents()) {
    throw InputError("the EU criterion needs one utility function per agent");
  }
  OracleOptions quiet = opt;
  quiet.partial_sweep_limit = 0;
  std::vector<bool> flags;
  for (Agent i = 0; i < problem.num_agents(); ++i) {
    const AssignmentProblem relabeled = problem.with_manipulator(i);
    const UtilityFunction* u = criterion == Criterion::EU ? &utilities[i] : nullptr;
    flags.push_back(!brute_force_best_response(relabeled, criterion, u, quiet).truthful_is_optimal);
  }
  return flags;
}

}  // namespace psm
