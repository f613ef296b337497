#pragma once

#include <psm/problem.hpp>

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace psm {

struct ExhaustionEvent {
  Rational time;
  House house;
};

/// Agent `agent` ate `house` during [begin, end).
struct EatingInterval {
  Agent agent;
  House house;
  Rational begin;
  Rational end;
};

struct EatingTrace {
  /// Eating start time per house; empty for houses nobody ever eats.
  std::vector<std::optional<Rational>> start;
  /// Exhaustions in time order. Simultaneous exhaustions share a time and
  /// appear in house-id order.
  std::vector<ExhaustionEvent> events;
  /// Per-agent consumption intervals, in the order they close.
  std::vector<EatingInterval> intervals;
  Rational end_time = 0;
};

struct PsResult {
  FractionalAssignment assignment;
  EatingTrace trace;
};

/// Simulation state handed to observers at time 0 and after every batch of
/// exhaustions, once every agent has re-targeted.
struct EatingState {
  const Rational& time;
  std::span<const Rational> remaining;
  std::span<const std::size_t> eaters;
  std::span<const std::optional<House>> target;
};

using EatingObserver = std::function<void(const EatingState&)>;

namespace detail {

struct Simulation {
  FractionalAssignment assignment;
  EatingTrace trace;
};

/// Event-driven simultaneous eating. `lists[i]` is agent i's reported order;
/// an agent whose listed houses are all gone stops eating.
inline Simulation simulate(std::size_t num_houses, std::span<const std::span<const House>> lists,
                           bool keep_trace, const EatingObserver* observer) {
  const std::size_t n = lists.size();
  const std::size_t m = num_houses;
  Simulation sim{FractionalAssignment(n, m), {}};
  sim.trace.start.assign(m, std::nullopt);

  std::vector<Rational> remaining(m, Rational(1));
  std::vector<std::size_t> eaters(m, 0);
  std::vector<std::size_t> cursor(n, 0);
  std::vector<std::optional<House>> target(n);
  std::vector<Rational> since(n);
  Rational now = 0;

  const auto retarget = [&](Agent i) {
    const auto list = lists[i];
    while (cursor[i] < list.size() && sgn(remaining[list[cursor[i]]]) == 0) ++cursor[i];
    if (cursor[i] == list.size()) {
      target[i].reset();
      return;
    }
    const House h = list[cursor[i]];
    target[i] = h;
    ++eaters[h];
    since[i] = now;
    if (!sim.trace.start[h]) sim.trace.start[h] = now;
  };

  const auto notify = [&] {
    if (observer && *observer) (*observer)(EatingState{now, remaining, eaters, target});
  };

  for (Agent i = 0; i < n; ++i) retarget(i);
  notify();

  std::vector<House> exhausted;
  Rational step, candidate;
  for (;;) {
    bool any = false;
    for (House h = 0; h < m; ++h) {
      if (eaters[h] == 0) continue;
      candidate = remaining[h] / eaters[h];
      if (!any || candidate < step) step = candidate;
      any = true;
    }
    if (!any) break;

    now += step;
    exhausted.clear();
    for (House h = 0; h < m; ++h) {
      if (eaters[h] == 0) continue;
      remaining[h] -= step * eaters[h];
      if (sgn(remaining[h]) == 0) exhausted.push_back(h);
    }
    if (keep_trace) {
      for (const House h : exhausted) sim.trace.events.push_back({now, h});
    }

    // Close every interval on an exhausted house before anyone re-targets.
    std::vector<Agent> movers;
    for (Agent i = 0; i < n; ++i) {
      if (target[i] && sgn(remaining[*target[i]]) == 0) {
        const House h = *target[i];
        sim.assignment(i, h) += now - since[i];
        if (keep_trace) sim.trace.intervals.push_back({i, h, since[i], now});
        --eaters[h];
        movers.push_back(i);
      }
    }
    for (const Agent i : movers) retarget(i);
    notify();
  }
  sim.trace.end_time = now;
  return sim;
}

inline std::vector<std::span<const House>> views(const AssignmentProblem& problem,
                                                 std::optional<std::span<const House>> report) {
  std::vector<std::span<const House>> lists;
  lists.reserve(problem.num_agents());
  for (Agent i = 0; i < problem.num_agents(); ++i) lists.emplace_back(problem.pref(i));
  if (report) {
    check_list(*report, problem.num_houses(), "report");
    lists[kManipulator] = *report;
  }
  return lists;
}

}  // namespace detail

/// Probabilistic serial outcome with its eating trace.
inline PsResult ps(const AssignmentProblem& problem) {
  const auto lists = detail::views(problem, std::nullopt);
  auto sim = detail::simulate(problem.num_houses(), lists, true, nullptr);
  return {std::move(sim.assignment), std::move(sim.trace)};
}

/// PS with a caller-supplied observer. The manipulator's list is replaced by
/// `report` when one is given.
inline PsResult ps_observed(const AssignmentProblem& problem, const EatingObserver& observer,
                            std::optional<std::span<const House>> report = std::nullopt) {
  const auto lists = detail::views(problem, report);
  auto sim = detail::simulate(problem.num_houses(), lists, true, &observer);
  return {std::move(sim.assignment), std::move(sim.trace)};
}

/// PS with the manipulator's list replaced by `report` (may be partial).
inline PsResult ps_with_report(const AssignmentProblem& problem, std::span<const House> report) {
  const auto lists = detail::views(problem, report);
  auto sim = detail::simulate(problem.num_houses(), lists, true, nullptr);
  return {std::move(sim.assignment), std::move(sim.trace)};
}

/// Eating start times under the reported profile.
inline std::vector<std::optional<Rational>> est(const AssignmentProblem& problem) {
  return ps(problem).trace.start;
}

inline std::vector<std::optional<Rational>> est_with_report(const AssignmentProblem& problem,
                                                            std::span<const House> report) {
  const auto lists = detail::views(problem, report);
  return detail::simulate(problem.num_houses(), lists, false, nullptr).trace.start;
}

/// The manipulator's row when he reports `list`.
inline Allocation ps1(std::span<const House> list, const AssignmentProblem& problem) {
  const auto lists = detail::views(problem, list);
  return detail::simulate(problem.num_houses(), lists, false, nullptr)
      .assignment.row(kManipulator);
}

}  // namespace psm
