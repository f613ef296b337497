#pragma once

#include <psm/compare.hpp>
#include <psm/ps.hpp>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <future>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace psm {

/// DIMACS literal: +v or -v for variable v in 1..n.
using Literal = int;
using TruthAssignment = std::vector<bool>;

/// 3-CNF in which every literal occurs exactly twice, so 3|C| = 4n.
struct Formula3SAT {
  std::size_t num_vars = 0;
  std::vector<std::array<Literal, 3>> clauses;

  void validate() const {
    if (num_vars == 0) throw InputError("formula has no variables");
    std::vector<int> count(2 * num_vars, 0);
    for (std::size_t c = 0; c < clauses.size(); ++c) {
      for (const Literal l : clauses[c]) {
        const auto v = static_cast<std::size_t>(std::abs(l));
        if (l == 0 || v > num_vars) {
          throw InputError("clause " + std::to_string(c + 1) + " has literal " + std::to_string(l) +
                           " outside 1.." + std::to_string(num_vars));
        }
        ++count[index(l)];
      }
    }
    for (std::size_t k = 0; k < count.size(); ++k) {
      if (count[k] != 2) {
        throw InputError("literal " + std::to_string(literal_at(k)) + " appears " +
                         std::to_string(count[k]) + " times; every literal must appear exactly twice");
      }
    }
  }

  /// 2(v-1) for x_v, 2(v-1)+1 for its negation.
  static std::size_t index(Literal l) {
    return 2 * static_cast<std::size_t>(std::abs(l) - 1) + (l < 0 ? 1 : 0);
  }
  static Literal literal_at(std::size_t k) {
    const auto v = static_cast<Literal>(k / 2 + 1);
    return k % 2 ? -v : v;
  }

  bool satisfied_by(const TruthAssignment& a) const {
    if (a.size() != num_vars) throw InputError("assignment size does not match the formula");
    return std::all_of(clauses.begin(), clauses.end(), [&](const auto& clause) {
      return std::any_of(clause.begin(), clause.end(), [&](Literal l) {
        return a[static_cast<std::size_t>(std::abs(l) - 1)] == (l > 0);
      });
    });
  }

  /// Reads "p cnf n c" followed by 0-terminated clauses; 'c' lines are comments.
  static Formula3SAT parse_dimacs(std::istream& in) {
    Formula3SAT f;
    std::optional<std::size_t> declared_clauses;
    std::vector<Literal> pending;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string first;
      if (!(ls >> first) || first[0] == 'c' || first[0] == '%') continue;
      if (first == "p") {
        std::string fmt;
        long nv = -1, nc = -1;
        if (!(ls >> fmt >> nv >> nc) || fmt != "cnf" || nv < 0 || nc < 0) {
          throw InputError("line " + std::to_string(line_no) + ": malformed problem line");
        }
        f.num_vars = static_cast<std::size_t>(nv);
        declared_clauses = static_cast<std::size_t>(nc);
        continue;
      }
      if (!declared_clauses) throw InputError("clause before the 'p cnf' line");
      std::istringstream all(line);
      std::string tok;
      while (all >> tok) {
        char* end = nullptr;
        const long l = std::strtol(tok.c_str(), &end, 10);
        if (*end != '\0') {
          throw InputError("line " + std::to_string(line_no) + ": bad literal '" + tok + "'");
        }
        if (l != 0) {
          pending.push_back(static_cast<Literal>(l));
          continue;
        }
        if (pending.size() != 3) {
          throw InputError("line " + std::to_string(line_no) + ": clause with " +
                           std::to_string(pending.size()) + " literals (expected 3)");
        }
        f.clauses.push_back({pending[0], pending[1], pending[2]});
        pending.clear();
      }
    }
    if (!declared_clauses) throw InputError("missing 'p cnf' line");
    if (!pending.empty()) throw InputError("last clause is not terminated by 0");
    if (f.clauses.size() != *declared_clauses) {
      throw InputError("header declares " + std::to_string(*declared_clauses) + " clauses, found " +
                       std::to_string(f.clauses.size()));
    }
    f.validate();
    return f;
  }

  std::string to_dimacs() const {
    std::ostringstream out;
    out << "p cnf " << num_vars << ' ' << clauses.size() << '\n';
    for (const auto& c : clauses) out << c[0] << ' ' << c[1] << ' ' << c[2] << " 0\n";
    return out.str();
  }
};

/// Bit v-1 of `bits` is the value of x_v.
inline TruthAssignment assignment_from_bits(std::size_t num_vars, unsigned long bits) {
  TruthAssignment a(num_vars);
  for (std::size_t v = 0; v < num_vars; ++v) a[v] = (bits >> v) & 1u;
  return a;
}

inline bool is_satisfiable(const Formula3SAT& f) {
  for (unsigned long bits = 0; bits < (1ul << f.num_vars); ++bits) {
    if (f.satisfied_by(assignment_from_bits(f.num_vars, bits))) return true;
  }
  return false;
}

/// Random exactly-twice formula: the 4n literal occurrences are shuffled into
/// clauses, redrawing any clause that holds both x and its negation. A clause
/// may repeat a literal.
template <typename Rng>
Formula3SAT random_exactly_twice_formula(std::size_t num_vars, Rng& rng) {
  if (num_vars == 0 || (4 * num_vars) % 3 != 0) {
    throw InputError("an exactly-twice 3-CNF needs 4n divisible by 3 (n = 3, 6, 9, ...)");
  }
  std::vector<Literal> occ;
  for (std::size_t k = 0; k < 2 * num_vars; ++k) {
    occ.push_back(Formula3SAT::literal_at(k));
    occ.push_back(Formula3SAT::literal_at(k));
  }
  Formula3SAT f{num_vars, {}};
  for (;;) {
    std::shuffle(occ.begin(), occ.end(), rng);
    f.clauses.clear();
    bool tautology = false;
    for (std::size_t k = 0; k < occ.size(); k += 3) {
      const std::array<Literal, 3> c{occ[k], occ[k + 1], occ[k + 2]};
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) tautology |= c[i] == -c[j];
      f.clauses.push_back(c);
    }
    if (!tautology) return f;
  }
}

inline constexpr std::size_t kParts = 18;

/// House and agent numbering of the reduction.
///
/// Houses: slowdown s^1..s^{n-1}; parts 18, 17, ..., 2, then part 1 (each part
/// holds its round houses, then its clause triplets); consolation prizes for
/// parts 2..18; the prize last. Agents: the manipulator, the dummy of parts
/// 2..18, then the literal agents part by part.
struct ReductionLayout {
  std::size_t n = 0;
  std::size_t num_clauses = 0;

  std::size_t part_size() const { return 2 * n * n + 3 * num_clauses; }
  std::size_t num_houses() const { return (n - 1) + kParts * part_size() + (kParts - 1) + 1; }
  std::size_t num_agents() const { return 1 + (kParts - 1) + kParts * 4 * n; }

  House slowdown(std::size_t r) const { return r - 1; }
  House part_base(std::size_t part) const {
    const std::size_t slot = part == 1 ? kParts - 1 : kParts - part;
    return (n - 1) + slot * part_size();
  }
  /// lit is a Formula3SAT::index.
  House round(std::size_t part, std::size_t r, std::size_t lit) const {
    return part_base(part) + (r - 1) * 2 * n + lit;
  }
  House clause(std::size_t part, std::size_t c, std::size_t k) const {
    return part_base(part) + 2 * n * n + 3 * c + k;
  }
  House consolation(std::size_t part) const { return (n - 1) + kParts * part_size() + (part - 2); }
  House prize() const { return num_houses() - 1; }
  /// The prize of part 1, the consolation prize elsewhere.
  House reward(std::size_t part) const { return part == 1 ? prize() : consolation(part); }

  Agent dummy(std::size_t part) const { return part - 1; }
  /// Agent `copy` (0 or 1) of literal `lit` in `part`.
  Agent literal_agent(std::size_t part, std::size_t lit, std::size_t copy) const {
    return kParts + (part - 1) * 4 * n + 2 * lit + copy;
  }
};

struct ReductionParams {
  Rational alpha;
  Rational eps;
  Rational negligible;
  /// Which of x_r / not x_r carries the +eps bump.
  bool bump_positive = true;
};

inline Rational pow_rational(const Rational& base, std::size_t e) {
  Rational r = 1;
  for (std::size_t k = 0; k < e; ++k) r *= base;
  return r;
}

inline constexpr long kDefaultAlpha = 4;

/// eps = 1/(alpha 2^{2n}), negligible = 1/(alpha^2 |H|^2). Tying eps to alpha
/// lets alpha doubling shrink the eps slack as well.
inline ReductionParams default_params(std::size_t n, std::size_t num_houses,
                                      const Rational& alpha = kDefaultAlpha) {
  ReductionParams p;
  p.alpha = alpha;
  p.eps = 1 / (alpha * pow_rational(2, 2 * n));
  p.eps.canonicalize();
  p.negligible = 1 / (alpha * alpha * num_houses * num_houses);
  p.negligible.canonicalize();
  return p;
}

struct ReductionInstance {
  Formula3SAT formula;
  ReductionParams params;
  ReductionLayout layout;
  AssignmentProblem problem;
  UtilityFunction utility;
  Rational target;
  /// clause_owner[c][k]: main-part agent whose head holds the triplet of clause c,
  /// for the k-th literal of c.
  std::vector<std::array<Agent, 3>> clause_owner;
};

namespace detail {

inline std::string literal_name(std::size_t lit) {
  return (lit % 2 ? "nx" : "x") + std::to_string(lit / 2 + 1);
}

inline void append_tail(HouseList& list, std::size_t m) {
  std::vector<bool> seen(m, false);
  for (const House h : list) seen[h] = true;
  for (House h = 0; h < m; ++h) {
    if (!seen[h]) list.push_back(h);
  }
}

// Per round: the two literal houses of x_r (positive first), then the slowdown
// house except in the last round.
inline HouseList chooser_head(const ReductionLayout& L, std::size_t part) {
  HouseList head;
  for (std::size_t r = 1; r <= L.n; ++r) {
    head.push_back(L.round(part, r, 2 * (r - 1)));
    head.push_back(L.round(part, r, 2 * (r - 1) + 1));
    if (r < L.n) head.push_back(L.slowdown(r));
  }
  head.push_back(L.reward(part));
  return head;
}

}  // namespace detail

/// Utilities of the manipulator; only part 1 and the slowdown houses matter.
inline UtilityFunction reduction_utility(const ReductionLayout& L, const ReductionParams& p) {
  UtilityFunction u{std::vector<Rational>(L.num_houses(), p.negligible)};
  const Rational base = 2 * p.alpha;
  for (std::size_t r = 1; r <= L.n; ++r) {
    const Rational big = pow_rational(base, 2 * (L.n - r));
    const std::size_t bumped = p.bump_positive ? 0 : 1;
    u.values[L.round(1, r, 2 * (r - 1) + bumped)] = big + p.eps;
    u.values[L.round(1, r, 2 * (r - 1) + 1 - bumped)] = big;
    if (r < L.n) u.values[L.slowdown(r)] = pow_rational(base, 2 * (L.n - r - 1) + 1);
  }
  u.values[L.prize()] = 1;
  return u;
}

/// Sum over rounds of 4/9 u(h^r_{x_r}) and 1/18 u(h^r_s) (no slowdown in the
/// last round), plus 25/27.
inline Rational target_utility(const ReductionLayout& L, const UtilityFunction& u) {
  Rational t(25, 27);
  for (std::size_t r = 1; r <= L.n; ++r) {
    t += Rational(4, 9) * u(L.round(1, r, 2 * (r - 1)));
    if (r < L.n) t += Rational(1, 18) * u(L.slowdown(r));
  }
  t.canonicalize();
  return t;
}

inline Rational target_utility(const ReductionInstance& inst) {
  return target_utility(inst.layout, inst.utility);
}

inline ReductionInstance reduce_3sat(const Formula3SAT& f, std::optional<ReductionParams> params = {}) {
  f.validate();
  ReductionLayout L{f.num_vars, f.clauses.size()};
  const std::size_t n = L.n, m = L.num_houses();
  ReductionParams p = params ? *params : default_params(n, m);
  if (sgn(p.eps) <= 0) throw InputError("eps must be positive");
  if (sgn(p.alpha) <= 0) throw InputError("alpha must be positive");
  if (sgn(p.negligible) < 0 || p.negligible * m * p.alpha >= 1) {
    throw InputError("negligible utilities must add up to less than 1/alpha");
  }

  // Triplet of clause c goes to a free copy of the negation of each of its literals.
  std::vector<std::array<std::size_t, 3>> owner_copy(f.clauses.size());
  std::vector<std::optional<std::size_t>> triplet_of(4 * n);  // indexed 2*lit + copy
  for (std::size_t c = 0; c < f.clauses.size(); ++c) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t neg = Formula3SAT::index(-f.clauses[c][k]);
      const std::size_t copy = triplet_of[2 * neg] ? 1 : 0;
      if (triplet_of[2 * neg + copy]) throw std::logic_error("literal used more than twice");
      triplet_of[2 * neg + copy] = c;
      owner_copy[c][k] = copy;
    }
  }

  std::vector<std::string> agent_names(L.num_agents()), house_names(m);
  for (std::size_t r = 1; r < n; ++r) house_names[L.slowdown(r)] = "s" + std::to_string(r);
  for (std::size_t D = 1; D <= kParts; ++D) {
    const std::string sfx = "_p" + std::to_string(D);
    for (std::size_t r = 1; r <= n; ++r)
      for (std::size_t lit = 0; lit < 2 * n; ++lit)
        house_names[L.round(D, r, lit)] = "h" + std::to_string(r) + "_" + detail::literal_name(lit) + sfx;
    for (std::size_t c = 0; c < f.clauses.size(); ++c)
      for (std::size_t k = 0; k < 3; ++k)
        house_names[L.clause(D, c, k)] =
            "c" + std::to_string(c + 1) + "_" + std::to_string(k + 1) + sfx;
    if (D >= 2) house_names[L.consolation(D)] = "cp" + std::to_string(D);
  }
  house_names[L.prize()] = "prize";

  std::vector<HouseList> prefs(L.num_agents());
  agent_names[kManipulator] = "m";
  prefs[kManipulator] = detail::chooser_head(L, 1);
  for (std::size_t D = 2; D <= kParts; ++D) {
    agent_names[L.dummy(D)] = "m" + std::to_string(D);
    prefs[L.dummy(D)] = detail::chooser_head(L, D);
  }
  for (std::size_t D = 1; D <= kParts; ++D) {
    for (std::size_t lit = 0; lit < 2 * n; ++lit) {
      for (std::size_t copy = 0; copy < 2; ++copy) {
        const Agent a = L.literal_agent(D, lit, copy);
        agent_names[a] = "a" + std::to_string(copy + 1) + "_" + detail::literal_name(lit) + "_p" +
                         std::to_string(D);
        HouseList& head = prefs[a];
        for (std::size_t r = 1; r <= n; ++r) head.push_back(L.round(D, r, lit));
        const std::size_t c = *triplet_of[2 * lit + copy];
        for (std::size_t k = 0; k < 3; ++k) head.push_back(L.clause(D, c, k));
        head.push_back(L.reward(D));
      }
    }
  }
  // The manipulator's list stays complete too: it is his true preference.
  for (auto& list : prefs) detail::append_tail(list, m);

  UtilityFunction u = reduction_utility(L, p);
  Rational t = target_utility(L, u);
  std::vector<std::array<Agent, 3>> owners(f.clauses.size());
  for (std::size_t c = 0; c < f.clauses.size(); ++c)
    for (std::size_t k = 0; k < 3; ++k)
      owners[c][k] = L.literal_agent(1, Formula3SAT::index(-f.clauses[c][k]), owner_copy[c][k]);

  return ReductionInstance{f,
                           p,
                           L,
                           AssignmentProblem(std::move(agent_names), std::move(house_names), std::move(prefs)),
                           std::move(u),
                           std::move(t),
                           std::move(owners)};
}

/// Per round: the house of the literal made true, its complement, then the
/// slowdown house (not in the last round); finally the prize. Length 3n.
inline HouseList prescribed_report(const ReductionInstance& inst, const TruthAssignment& a) {
  const auto& L = inst.layout;
  if (a.size() != L.n) throw InputError("assignment must cover every variable");
  HouseList out;
  for (std::size_t r = 1; r <= L.n; ++r) {
    const std::size_t pos = 2 * (r - 1);
    out.push_back(L.round(1, r, a[r - 1] ? pos : pos + 1));
    out.push_back(L.round(1, r, a[r - 1] ? pos + 1 : pos));
    if (r < L.n) out.push_back(L.slowdown(r));
  }
  out.push_back(L.prize());
  return out;
}

struct AssignmentEvaluation {
  Rational utility;
  bool reaches_target = false;
  Allocation alloc;
};

inline AssignmentEvaluation evaluate_assignment(const ReductionInstance& inst, const TruthAssignment& a) {
  const HouseList report = prescribed_report(inst, a);
  Allocation alloc = ps1(report, inst.problem);
  Rational value = eu_value(alloc, inst.utility);
  const bool reaches = value >= inst.target;
  return {std::move(value), reaches, std::move(alloc)};
}

struct TimingDiagnostic {
  std::string group;
  Rational expected;
  Rational actual;
};

struct TimingAudit {
  /// Manipulator time per round: literal, literal, slowdown.
  std::vector<std::array<Rational, 3>> round_pieces;
  std::vector<Rational> round_costs;
  /// Start of the prize for the manipulator.
  Rational clause_round_start;
  /// Lead of each main-part literal agent over the manipulator at the clause round.
  std::map<Agent, Rational> leads;
  Rational solo_prize_time;
  Rational prize_share;
  /// Distinct "time to exhaust if the manipulator joined" values at his decision points.
  std::size_t distinct_group_times = 0;
  std::vector<TimingDiagnostic> failures;
  bool ok() const { return failures.empty(); }
};

/// Replays prescribed play and checks the timing the construction relies on.
/// Agents of the literal the manipulator eats first in a round (the literal
/// set true) lead by 1/9 when the clause round starts; the others start with
/// him.
inline TimingAudit timing_audit(const ReductionInstance& inst, const TruthAssignment& a) {
  const auto& L = inst.layout;
  const HouseList report = prescribed_report(inst, a);
  TimingAudit audit;
  std::set<Rational> group_times;
  std::optional<House> last_target;
  const EatingObserver watch = [&](const EatingState& s) {
    const auto& t = s.target[kManipulator];
    if (!t || t == last_target) return;
    last_target = t;
    for (House h = 0; h < s.remaining.size(); ++h) {
      if (h == *t || s.eaters[h] == 0) continue;
      Rational dt = s.remaining[h] / (s.eaters[h] + 1);
      group_times.insert(dt);
    }
  };
  const PsResult res = ps_observed(inst.problem, watch, std::span<const House>(report));
  audit.distinct_group_times = group_times.size();

  std::vector<const EatingInterval*> mine;
  std::map<Agent, Rational> triplet_start;
  std::optional<Rational> other_on_prize;
  for (const auto& iv : res.trace.intervals) {
    if (iv.agent == kManipulator) mine.push_back(&iv);
    if (iv.house == L.prize() && iv.agent != kManipulator &&
        (!other_on_prize || iv.begin < *other_on_prize)) {
      other_on_prize = iv.begin;
    }
  }
  const auto fail = [&](std::string group, const Rational& expected, const Rational& actual) {
    audit.failures.push_back({std::move(group), expected, actual});
  };
  const auto interval_on = [&](House h) -> const EatingInterval* {
    for (const auto* iv : mine)
      if (iv->house == h) return iv;
    return nullptr;
  };

  for (std::size_t r = 1; r <= L.n; ++r) {
    const std::size_t k = 3 * (r - 1);
    const EatingInterval* first = interval_on(report[k]);
    const EatingInterval* second = interval_on(report[k + 1]);
    const EatingInterval* slow = r < L.n ? interval_on(report[k + 2]) : nullptr;
    std::array<Rational, 3> pieces{0, 0, 0};
    if (first) pieces[0] = first->end - first->begin;
    if (second) pieces[1] = second->end - second->begin;
    if (slow) pieces[2] = slow->end - slow->begin;
    const std::string name = "round " + std::to_string(r);
    const std::array<Rational, 3> want{Rational(1, 3), Rational(1, 9),
                                       r < L.n ? Rational(1, 18) : Rational(0)};
    const char* labels[3] = {" first literal", " second literal", " slowdown"};
    for (int j = 0; j < 3; ++j) {
      if (pieces[j] != want[j]) fail(name + labels[j], want[j], pieces[j]);
    }
    const Rational cost = pieces[0] + pieces[1] + pieces[2];
    const Rational want_cost = r < L.n ? Rational(1, 2) : Rational(4, 9);
    if (cost != want_cost) fail(name + " manipulator cost", want_cost, cost);
    audit.round_pieces.push_back(pieces);
    audit.round_costs.push_back(cost);
  }

  const EatingInterval* prize = interval_on(L.prize());
  if (!prize) {
    fail("manipulator on the prize", 1, 0);
    return audit;
  }
  audit.clause_round_start = prize->begin;
  audit.prize_share = res.assignment(kManipulator, L.prize());
  audit.solo_prize_time = (other_on_prize ? *other_on_prize : prize->end) - prize->begin;
  if (audit.solo_prize_time < Rational(8, 9)) {
    fail("manipulator alone on the prize", Rational(8, 9), audit.solo_prize_time);
  }

  for (const auto& iv : res.trace.intervals) {
    if (iv.agent < kParts || iv.agent >= kParts + 4 * L.n) continue;
    for (std::size_t c = 0; c < L.num_clauses; ++c) {
      if (iv.house == L.clause(1, c, 0)) triplet_start.emplace(iv.agent, iv.begin);
    }
  }
  for (std::size_t lit = 0; lit < 2 * L.n; ++lit) {
    const bool made_true = a[lit / 2] == (lit % 2 == 0);
    const Rational want = made_true ? Rational(1, 9) : Rational(0);
    for (std::size_t copy = 0; copy < 2; ++copy) {
      const Agent ag = L.literal_agent(1, lit, copy);
      const auto it = triplet_start.find(ag);
      if (it == triplet_start.end()) continue;
      Rational lead = audit.clause_round_start - it->second;
      audit.leads[ag] = lead;
      if (lead != want) {
        fail(std::string(made_true ? "true" : "false") + "-literal agent " +
                 inst.problem.agent_name(ag) + " lead",
             want, lead);
      }
    }
  }
  return audit;
}

struct SweepEntry {
  TruthAssignment assignment;
  bool satisfies = false;
  Rational utility;
  bool reaches_target = false;
  bool timing_ok = false;
};

struct ReductionVerdict {
  ReductionParams params;
  std::size_t alpha_doublings = 0;
  bool satisfiable = false;
  bool target_reachable = false;
  bool timing_ok = false;
  std::size_t distinct_group_times = 0;
  Rational target;
  std::vector<SweepEntry> sweep;
  std::vector<std::string> diagnostics;
  bool equivalent() const { return satisfiable == target_reachable; }
  bool passed() const { return equivalent() && timing_ok; }
};

struct VerifyOptions {
  std::optional<Rational> alpha;
  std::optional<Rational> eps;
  bool bump_positive = true;
  std::size_t max_doublings = 4;
  unsigned jobs = 1;
};

/// Runs all 2^n prescribed plays; on failure alpha doubles (up to
/// max_doublings) and the sweep repeats.
inline ReductionVerdict verify_reduction(const Formula3SAT& f, const VerifyOptions& opt = {}) {
  f.validate();
  const ReductionLayout L{f.num_vars, f.clauses.size()};
  ReductionParams p = default_params(L.n, L.num_houses(), opt.alpha.value_or(Rational(kDefaultAlpha)));
  if (opt.eps) p.eps = *opt.eps;
  p.bump_positive = opt.bump_positive;
  const bool sat = is_satisfiable(f);

  ReductionVerdict v;
  for (std::size_t round = 0;; ++round) {
    const ReductionInstance inst = reduce_3sat(f, p);
    const std::size_t total = std::size_t{1} << L.n;
    std::vector<SweepEntry> sweep(total);
    std::vector<TimingAudit> audits(total);
    const unsigned jobs = std::max(1u, opt.jobs);
    for (std::size_t start = 0; start < total; start += jobs) {
      std::vector<std::future<void>> pending;
      for (std::size_t bits = start; bits < std::min(total, start + jobs); ++bits) {
        pending.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, [&, bits] {
          const TruthAssignment a = assignment_from_bits(L.n, bits);
          const auto eval = evaluate_assignment(inst, a);
          audits[bits] = timing_audit(inst, a);
          sweep[bits] = {a, f.satisfied_by(a), eval.utility, eval.reaches_target, audits[bits].ok()};
        }));
      }
      for (auto& fu : pending) fu.get();
    }

    v = ReductionVerdict{};
    v.params = p;
    v.alpha_doublings = round;
    v.satisfiable = sat;
    v.target = inst.target;
    v.timing_ok = true;
    for (std::size_t bits = 0; bits < total; ++bits) {
      v.target_reachable |= sweep[bits].reaches_target;
      v.timing_ok &= sweep[bits].timing_ok;
      v.distinct_group_times = std::max(v.distinct_group_times, audits[bits].distinct_group_times);
      for (const auto& d : audits[bits].failures) {
        v.diagnostics.push_back("assignment " + std::to_string(bits) + ": " + d.group + " expected " +
                                to_string(d.expected) + ", got " + to_string(d.actual));
      }
    }
    v.sweep = std::move(sweep);
    if (v.passed() || round == opt.max_doublings) return v;
    p = default_params(L.n, L.num_houses(), p.alpha * 2);
    if (opt.eps) p.eps = *opt.eps;
    p.bump_positive = opt.bump_positive;
  }
}

/// (x1 v x2 v x3)(~x1 v ~x2 v ~x3)(x1 v ~x2 v x3)(~x1 v x2 v ~x3).
inline Formula3SAT sample_formula() {
  return Formula3SAT{3, {{{1, 2, 3}}, {{-1, -2, -3}}, {{1, -2, 3}}, {{-1, 2, -3}}}};
}

}  // namespace psm
