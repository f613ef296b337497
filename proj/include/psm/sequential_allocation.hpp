#pragma once

#include <psm/compare.hpp>
#include <psm/ps.hpp>

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psm {

using Object = std::size_t;
using ObjectList = std::vector<Object>;

/// Raised for sequential-allocation settings outside the supported case.
class UnsupportedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (N, O, prefs, policy). Agent 0's list may be partial; the others rank
/// every object. policy[t] picks at turn t.
struct SAInstance {
  std::size_t num_objects = 0;
  std::vector<ObjectList> prefs;
  std::vector<Agent> policy;

  void validate() const {
    if (prefs.empty()) throw InputError("sequential allocation needs at least one agent");
    for (Agent i = 0; i < prefs.size(); ++i) {
      detail::check_list(prefs[i], num_objects, "agent " + std::to_string(i + 1));
      if (i != kManipulator && prefs[i].size() != num_objects) {
        throw InputError("agent " + std::to_string(i + 1) + " must rank every object");
      }
    }
    if (policy.size() != num_objects) throw InputError("the policy must cover every turn");
    for (const Agent a : policy) {
      if (a >= prefs.size()) throw InputError("policy names an unknown agent");
    }
  }
};

/// Alternating policy 0,1,0,1,... over `turns` turns.
inline std::vector<Agent> alternating_policy(std::size_t turns) {
  std::vector<Agent> pi(turns);
  for (std::size_t t = 0; t < turns; ++t) pi[t] = t % 2;
  return pi;
}

struct DiscreteAssignment {
  std::vector<std::optional<Agent>> owner;
  /// Objects each agent picked, in pick order.
  std::vector<ObjectList> picks;

  ObjectList bundle(Agent i) const {
    ObjectList b = picks.at(i);
    std::sort(b.begin(), b.end());
    return b;
  }
};

/// Greedy picking: at each turn the scheduled agent takes his best unowned
/// listed object, or nothing once his list is used up.
inline DiscreteAssignment sequential_allocation(const SAInstance& inst) {
  inst.validate();
  DiscreteAssignment out{std::vector<std::optional<Agent>>(inst.num_objects),
                         std::vector<ObjectList>(inst.prefs.size())};
  std::vector<std::size_t> cursor(inst.prefs.size(), 0);
  for (const Agent a : inst.policy) {
    const ObjectList& list = inst.prefs[a];
    while (cursor[a] < list.size() && out.owner[list[cursor[a]]]) ++cursor[a];
    if (cursor[a] == list.size()) continue;
    const Object o = list[cursor[a]];
    out.owner[o] = a;
    out.picks[a].push_back(o);
  }
  return out;
}

/// House h splits into objects 2h (first half) and 2h+1 (second half).
struct HalfHouseMap {
  std::size_t num_houses = 0;

  static Object first(House h) { return 2 * h; }
  static Object second(House h) { return 2 * h + 1; }
  static House house_of(Object o) { return o / 2; }
  static bool is_first(Object o) { return o % 2 == 0; }

  /// h_j ≻ h_k becomes h_j¹ ≻ h_j² ≻ h_k¹ ≻ h_k².
  static ObjectList expand(std::span<const House> order) {
    ObjectList out;
    out.reserve(2 * order.size());
    for (const House h : order) {
      out.push_back(first(h));
      out.push_back(second(h));
    }
    return out;
  }

  /// Every house's two halves are adjacent in `order`.
  static bool consecutive(std::span<const Object> order) {
    if (order.size() % 2 != 0) return false;
    for (std::size_t k = 0; k < order.size(); k += 2) {
      if (house_of(order[k]) != house_of(order[k + 1])) return false;
    }
    return true;
  }

  /// Houses in order of first appearance of either half.
  static HouseList project(std::span<const Object> order) {
    HouseList out;
    for (const Object o : order) {
      const House h = house_of(o);
      if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(h);
    }
    return out;
  }

  /// share(i, h) = (owns h¹ + owns h²) / 2.
  FractionalAssignment average(const DiscreteAssignment& sa, std::size_t agents) const {
    FractionalAssignment p(agents, num_houses);
    const Rational half(1, 2);
    for (Object o = 0; o < sa.owner.size(); ++o) {
      if (sa.owner[o]) p(*sa.owner[o], house_of(o)) += half;
    }
    return p;
  }
};

struct HalfHouseReduction {
  SAInstance instance;
  HalfHouseMap map;
};

/// Two-agent PS problem -> sequential allocation over half-houses under the
/// alternating policy.
inline HalfHouseReduction half_house_reduction(const AssignmentProblem& problem) {
  if (problem.num_agents() != 2) throw InputError("the half-house reduction needs exactly two agents");
  if (!problem.is_complete(0) || !problem.is_complete(1)) {
    throw InputError("the half-house reduction needs complete preference lists");
  }
  const std::size_t m = problem.num_houses();
  HalfHouseReduction r{{2 * m, {}, alternating_policy(2 * m)}, {m}};
  for (Agent i = 0; i < 2; ++i) r.instance.prefs.push_back(HalfHouseMap::expand(problem.pref(i)));
  return r;
}

/// Tiers of mutually indifferent objects, best tier first.
using WeakOrder = std::vector<ObjectList>;

struct SABestResponse {
  ObjectList report;
  DiscreteAssignment assignment;
  /// T_1, ..., T_{m'} (each sorted by object id).
  std::vector<ObjectList> target_sets;
};

namespace detail {

inline void require_two_agent_alternating(const SAInstance& inst) {
  inst.validate();
  if (inst.prefs.size() != 2) throw UnsupportedError("best response needs exactly two agents");
  if (inst.policy != alternating_policy(inst.num_objects)) {
    throw UnsupportedError("best response supports only the alternating policy 1212...");
  }
}

/// Can the manipulator secure every object in `targets` against a truthful
/// opponent? At each of his turns he takes the unowned target the opponent
/// ranks highest.
inline bool achievable(std::span<const Object> targets_by_opponent_rank,
                       std::span<const Object> opponent, std::size_t num_objects) {
  std::vector<bool> owned(num_objects, false);
  std::vector<bool> is_target(num_objects, false);
  for (const Object o : targets_by_opponent_rank) is_target[o] = true;
  std::size_t next_target = 0, opp_cursor = 0;
  for (std::size_t turn = 0; turn < num_objects; ++turn) {
    if (turn % 2 == 0) {
      if (next_target == targets_by_opponent_rank.size()) return true;
      owned[targets_by_opponent_rank[next_target++]] = true;
    } else {
      while (opp_cursor < opponent.size() && owned[opponent[opp_cursor]]) ++opp_cursor;
      if (opp_cursor == opponent.size()) continue;
      const Object o = opponent[opp_cursor];
      if (is_target[o]) return false;
      owned[o] = true;
    }
  }
  return next_target == targets_by_opponent_rank.size();
}

}  // namespace detail

/// Two-agent alternating best response of agent 0 with weak true order
/// `truth`. Ties inside a tier follow `tie_break`. Builds target sets
/// T_k = T_{k-1} + o_k whenever that set is still achievable.
inline SABestResponse sa_best_response_2(const SAInstance& inst, const WeakOrder& truth,
                                         std::span<const Object> tie_break) {
  detail::require_two_agent_alternating(inst);
  const std::size_t mo = inst.num_objects;
  if (!is_permutation_of_range(tie_break, mo)) {
    throw InputError("tie-break order must rank every object exactly once");
  }
  std::vector<std::size_t> tb_rank(mo);
  for (std::size_t k = 0; k < mo; ++k) tb_rank[tie_break[k]] = k;

  ObjectList linear;
  for (ObjectList tier : truth) {
    std::sort(tier.begin(), tier.end(), [&](Object a, Object b) { return tb_rank[a] < tb_rank[b]; });
    linear.insert(linear.end(), tier.begin(), tier.end());
  }
  if (!is_permutation_of_range(linear, mo)) {
    throw InputError("the weak order must place every object in exactly one tier");
  }

  const ObjectList& opponent = inst.prefs[1];
  std::vector<std::size_t> opp_rank(mo);
  for (std::size_t k = 0; k < mo; ++k) opp_rank[opponent[k]] = k;

  SABestResponse out;
  ObjectList targets;  // kept sorted by opponent rank
  for (const Object o : linear) {
    ObjectList trial = targets;
    trial.insert(std::upper_bound(trial.begin(), trial.end(), o,
                                  [&](Object a, Object b) { return opp_rank[a] < opp_rank[b]; }),
                 o);
    if (detail::achievable(trial, opponent, mo)) targets = std::move(trial);
    ObjectList sorted = targets;
    std::sort(sorted.begin(), sorted.end());
    out.target_sets.push_back(std::move(sorted));
  }

  out.report = targets;
  std::vector<bool> used(mo, false);
  for (const Object o : targets) used[o] = true;
  for (const Object o : linear) {
    if (!used[o]) out.report.push_back(o);
  }

  SAInstance played = inst;
  played.prefs[0] = out.report;
  out.assignment = sequential_allocation(played);
  if (out.assignment.bundle(0) != out.target_sets.back()) {
    throw std::logic_error("sa_best_response_2: report does not realize the target set");
  }
  return out;
}

/// Ties broken in the opponent's order.
inline SABestResponse sa_best_response_2(const SAInstance& inst, const WeakOrder& truth) {
  detail::require_two_agent_alternating(inst);
  return sa_best_response_2(inst, truth, inst.prefs[1]);
}

namespace detail {

/// Re-times the picks of an achievable half-house set `secured` so the
/// manipulator's report can list both halves of every house back to back.
/// A target is taken when the opponent would take it next; idle turns start
/// a house whose halves are both secured (most threatened first). A house
/// secured by its first half only then loses its second half to the
/// opponent's very next pick, and a house secured by its second half only is
/// entered right after the opponent took the first half. Lost halves are
/// inserted next to their secured twins; untouched houses follow in
/// `true_pref` order.
inline ObjectList consecutive_schedule(std::span<const Object> secured,
                                       std::span<const Object> opponent,
                                       std::span<const House> true_pref) {
  const std::size_t mo = opponent.size();
  std::vector<bool> target(mo, false), owned(mo, false);
  for (const Object o : secured) target[o] = true;
  const auto full = [&](House h) {
    return target[HalfHouseMap::first(h)] && target[HalfHouseMap::second(h)];
  };
  std::vector<House> full_queue;
  for (const Object o : opponent) {
    if (HalfHouseMap::is_first(o) && full(HalfHouseMap::house_of(o))) {
      full_queue.push_back(HalfHouseMap::house_of(o));
    }
  }

  ObjectList picks;
  std::optional<Object> pending;
  std::size_t next_full = 0, cursor = 0;
  const auto opponent_top = [&]() -> std::optional<Object> {
    while (cursor < mo && owned[opponent[cursor]]) ++cursor;
    if (cursor == mo) return std::nullopt;
    return opponent[cursor];
  };
  for (std::size_t turn = 0; turn < mo; ++turn) {
    if (turn % 2 == 1) {
      if (const auto o = opponent_top()) owned[*o] = true;
      continue;
    }
    if (picks.size() == secured.size()) continue;
    Object pick;
    const auto threatened = opponent_top();
    if (pending) {
      pick = *pending;
      pending.reset();
    } else if (threatened && target[*threatened]) {
      pick = *threatened;
    } else {
      while (next_full < full_queue.size() && owned[HalfHouseMap::first(full_queue[next_full])]) {
        ++next_full;
      }
      if (next_full == full_queue.size()) {
        throw std::logic_error("consecutive_schedule: no secured house left for an idle turn");
      }
      pick = HalfHouseMap::first(full_queue[next_full]);
    }
    if (owned[pick]) throw std::logic_error("consecutive_schedule: secured half already taken");
    if (HalfHouseMap::is_first(pick) && full(HalfHouseMap::house_of(pick))) {
      pending = HalfHouseMap::second(HalfHouseMap::house_of(pick));
    }
    owned[pick] = true;
    picks.push_back(pick);
  }

  ObjectList order;
  std::vector<bool> listed(mo / 2, false);
  for (const Object o : picks) {
    const House h = HalfHouseMap::house_of(o);
    if (listed[h]) continue;
    listed[h] = true;
    order.push_back(HalfHouseMap::first(h));
    order.push_back(HalfHouseMap::second(h));
  }
  for (const House h : true_pref) {
    if (listed[h]) continue;
    order.push_back(HalfHouseMap::first(h));
    order.push_back(HalfHouseMap::second(h));
  }
  return order;
}

}  // namespace detail

struct EuBestResponse2 {
  HouseList report;
  FractionalAssignment assignment;
  /// Consecutive half-house report the house order was projected from.
  ObjectList object_report;
};

/// Two-agent EU best response, valid for every utility consistent with
/// `true_pref`: half-house reduction with the manipulator indifferent
/// between the halves of a house, sequential-allocation best response,
/// consecutivity repair, projection back to houses.
inline EuBestResponse2 eu_best_response_2(const AssignmentProblem& problem,
                                          std::span<const House> true_pref) {
  if (problem.num_agents() != 2) throw InputError("eu_best_response_2 needs exactly two agents");
  if (!is_permutation_of_range(true_pref, problem.num_houses())) {
    throw InputError("the manipulator's true preference must rank every house exactly once");
  }
  const std::size_t m = problem.num_houses();
  const AssignmentProblem truthful = problem.with_report(HouseList(true_pref.begin(), true_pref.end()));
  HalfHouseReduction red = half_house_reduction(truthful);

  WeakOrder weak;
  for (const House h : true_pref) weak.push_back({HalfHouseMap::first(h), HalfHouseMap::second(h)});
  const SABestResponse br = sa_best_response_2(red.instance, weak);
  const ObjectList& secured = br.target_sets.back();

  const ObjectList order = detail::consecutive_schedule(secured, red.instance.prefs[1], true_pref);
  if (!HalfHouseMap::consecutive(order)) {
    throw std::logic_error("eu_best_response_2: repaired report is not consecutive");
  }
  SAInstance replay = red.instance;
  replay.prefs[0] = order;
  if (sequential_allocation(replay).bundle(0) != secured) {
    throw std::logic_error("eu_best_response_2: consecutivity repair changed the allocation");
  }

  EuBestResponse2 out;
  out.object_report = order;
  out.report = HalfHouseMap::project(order);
  out.assignment = ps_with_report(problem, out.report).assignment;
  const FractionalAssignment expected = red.map.average(br.assignment, 2);
  for (House h = 0; h < m; ++h) {
    if (out.assignment(0, h) != expected(0, h)) {
      throw std::logic_error("eu_best_response_2: PS outcome disagrees with the half-house picks");
    }
  }
  return out;
}

inline EuBestResponse2 eu_best_response_2(const AssignmentProblem& problem) {
  return eu_best_response_2(problem, problem.pref(kManipulator));
}

}  // namespace psm
