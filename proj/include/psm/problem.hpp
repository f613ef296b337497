#pragma once

#include <psm/rational.hpp>

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace psm {

using Agent = std::size_t;
using House = std::size_t;
using HouseList = std::vector<House>;

/// One agent's row of a fractional assignment, indexed by house id.
using Allocation = std::vector<Rational>;

/// Index of the manipulating agent. Every algorithm in the library computes
/// responses for this agent; other agents are handled by relabeling.
inline constexpr Agent kManipulator = 0;

namespace detail {

inline void check_list(std::span<const House> list, std::size_t num_houses,
                       std::string_view who) {
  std::vector<bool> seen(num_houses, false);
  for (const House h : list) {
    if (h >= num_houses) {
      throw InputError(std::string(who) + ": unknown house id " + std::to_string(h));
    }
    if (seen[h]) {
      throw InputError(std::string(who) + ": duplicate house id " + std::to_string(h));
    }
    seen[h] = true;
  }
}

inline std::vector<std::string> default_names(char prefix, std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}

}  // namespace detail

inline bool is_permutation_of_range(std::span<const House> list, std::size_t size) {
  if (list.size() != size) return false;
  std::vector<bool> seen(size, false);
  for (const House h : list) {
    if (h >= size || seen[h]) return false;
    seen[h] = true;
  }
  return true;
}

/// (N, H, prefs). Agent 0 is the manipulator and may report a partial list;
/// every other agent reports a permutation of H.
class AssignmentProblem {
 public:
  AssignmentProblem(std::vector<std::string> agent_names, std::vector<std::string> house_names,
                    std::vector<HouseList> prefs)
      : agents_(std::make_shared<const std::vector<std::string>>(std::move(agent_names))),
        houses_(std::make_shared<const std::vector<std::string>>(std::move(house_names))),
        prefs_(std::move(prefs)) {
    validate_names(*agents_, "agent");
    validate_names(*houses_, "house");
    if (prefs_.size() != agents_->size()) {
      throw InputError("expected " + std::to_string(agents_->size()) + " preference lists, got " +
                       std::to_string(prefs_.size()));
    }
    if (prefs_.empty()) throw InputError("an assignment problem needs at least one agent");
    for (Agent i = 0; i < prefs_.size(); ++i) {
      detail::check_list(prefs_[i], num_houses(), "agent " + (*agents_)[i]);
      if (i != kManipulator && prefs_[i].size() != num_houses()) {
        throw InputError("agent " + (*agents_)[i] + " must rank every house");
      }
    }
  }

  /// Unnamed problem; agents are a1..an and houses h1..hm.
  static AssignmentProblem from_prefs(std::size_t num_houses, std::vector<HouseList> prefs) {
    const std::size_t n = prefs.size();
    return AssignmentProblem(detail::default_names('a', n), detail::default_names('h', num_houses),
                             std::move(prefs));
  }

  std::size_t num_agents() const { return prefs_.size(); }
  std::size_t num_houses() const { return houses_->size(); }

  const HouseList& pref(Agent i) const { return prefs_.at(i); }
  const std::vector<HouseList>& prefs() const { return prefs_; }
  bool is_complete(Agent i) const { return prefs_.at(i).size() == num_houses(); }

  const std::string& agent_name(Agent i) const { return agents_->at(i); }
  const std::string& house_name(House h) const { return houses_->at(h); }
  const std::vector<std::string>& agent_names() const { return *agents_; }
  const std::vector<std::string>& house_names() const { return *houses_; }

  std::optional<House> find_house(std::string_view name) const {
    const auto it = std::find(houses_->begin(), houses_->end(), name);
    if (it == houses_->end()) return std::nullopt;
    return static_cast<House>(it - houses_->begin());
  }

  /// Same problem with the manipulator reporting `report` instead.
  AssignmentProblem with_report(HouseList report) const {
    detail::check_list(report, num_houses(), "report");
    AssignmentProblem copy = *this;
    copy.prefs_[kManipulator] = std::move(report);
    return copy;
  }

  /// Swaps agent `a` into the manipulator slot. Both lists involved must be
  /// complete, since only the manipulator slot may hold a partial list.
  AssignmentProblem with_manipulator(Agent a) const {
    if (a >= num_agents()) throw InputError("agent index out of range");
    if (a == kManipulator) return *this;
    std::vector<std::string> names = *agents_;
    std::vector<HouseList> prefs = prefs_;
    std::swap(names[kManipulator], names[a]);
    std::swap(prefs[kManipulator], prefs[a]);
    return AssignmentProblem(std::move(names), *houses_, std::move(prefs));
  }

 private:
  static void validate_names(const std::vector<std::string>& names, std::string_view kind) {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InputError("duplicate " + std::string(kind) + " name");
    }
    for (const auto& n : names) {
      if (n.empty()) throw InputError("empty " + std::string(kind) + " name");
    }
  }

  std::shared_ptr<const std::vector<std::string>> agents_;
  std::shared_ptr<const std::vector<std::string>> houses_;
  std::vector<HouseList> prefs_;
};

/// n x m matrix of exact shares.
class FractionalAssignment {
 public:
  FractionalAssignment() = default;
  FractionalAssignment(std::size_t agents, std::size_t houses)
      : agents_(agents), houses_(houses), cells_(agents * houses) {}

  std::size_t num_agents() const { return agents_; }
  std::size_t num_houses() const { return houses_; }

  Rational& operator()(Agent i, House h) { return cells_[i * houses_ + h]; }
  const Rational& operator()(Agent i, House h) const { return cells_[i * houses_ + h]; }

  std::span<const Rational> row_view(Agent i) const {
    return {cells_.data() + i * houses_, houses_};
  }
  Allocation row(Agent i) const {
    const auto v = row_view(i);
    return {v.begin(), v.end()};
  }

  Rational row_sum(Agent i) const {
    Rational s = 0;
    for (const auto& x : row_view(i)) s += x;
    return s;
  }
  Rational column_sum(House h) const {
    Rational s = 0;
    for (Agent i = 0; i < agents_; ++i) s += (*this)(i, h);
    return s;
  }

  friend bool operator==(const FractionalAssignment&, const FractionalAssignment&) = default;

 private:
  std::size_t agents_ = 0;
  std::size_t houses_ = 0;
  std::vector<Rational> cells_;
};

/// Cardinal utilities of the manipulator, indexed by house id.
struct UtilityFunction {
  std::vector<Rational> values;

  const Rational& operator()(House h) const { return values.at(h); }
  std::size_t size() const { return values.size(); }

  /// h before h' in `pref` implies u(h) > u(h').
  bool consistent_with(std::span<const House> pref) const {
    for (std::size_t k = 1; k < pref.size(); ++k) {
      if (!(values.at(pref[k - 1]) > values.at(pref[k]))) return false;
    }
    return true;
  }
};

inline HouseList identity_order(std::size_t m) {
  HouseList l(m);
  std::iota(l.begin(), l.end(), House{0});
  return l;
}

}  // namespace psm
