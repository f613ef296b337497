#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace psm;
using namespace psm::test;

namespace {

const char* kUnsatDimacs =
    "c x1 and x2 forced, then x3 both ways\n"
    "p cnf 3 4\n"
    "1 1 2 0\n"
    "-1 -1 2 0\n"
    "-2 3 3 0\n"
    "-2 -3 -3 0\n";

Formula3SAT parse(const std::string& text) {
  std::istringstream in(text);
  return Formula3SAT::parse_dimacs(in);
}

const ReductionInstance& sample_instance() {
  static const ReductionInstance inst = reduce_3sat(sample_formula());
  return inst;
}

HouseList head_of(const ReductionInstance& inst, const std::string& agent, std::size_t len) {
  for (Agent a = 0; a < inst.problem.num_agents(); ++a) {
    if (inst.problem.agent_name(a) == agent) {
      const auto& p = inst.problem.pref(a);
      return HouseList(p.begin(), p.begin() + len);
    }
  }
  throw std::out_of_range(agent);
}

std::vector<std::string> names(const ReductionInstance& inst, const HouseList& hs) {
  std::vector<std::string> out;
  for (const House h : hs) out.push_back(inst.problem.house_name(h));
  return out;
}

}  // namespace

TEST(Formula, DimacsRoundTrip) {
  const auto f = sample_formula();
  EXPECT_NO_THROW(f.validate());
  const auto g = parse(f.to_dimacs());
  EXPECT_EQ(g.num_vars, 3u);
  EXPECT_EQ(g.clauses, f.clauses);
}

TEST(Formula, DimacsErrors) {
  EXPECT_THROW(parse("1 2 3 0\n"), InputError);
  EXPECT_THROW(parse("p cnf 3 1\n1 2 0\n"), InputError);
  EXPECT_THROW(parse("p cnf 3 1\n1 2 x 0\n"), InputError);
  EXPECT_THROW(parse("p cnf 3 2\n1 2 3 0\n"), InputError);
  EXPECT_THROW(parse("p cnf 3 1\n1 2 3\n"), InputError);
  EXPECT_THROW(parse("p dnf 3 1\n"), InputError);
}

TEST(Formula, ValidateNamesTheBadLiteral) {
  Formula3SAT f = sample_formula();
  f.clauses[0][0] = 2;
  try {
    f.validate();
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("literal 1 appears 1 times"), std::string::npos) << e.what();
  }
  f.clauses[0][0] = 4;
  EXPECT_THROW(f.validate(), InputError);
}

TEST(Formula, SatisfiabilityByTruthTable) {
  const auto f = sample_formula();
  EXPECT_TRUE(is_satisfiable(f));
  EXPECT_TRUE(f.satisfied_by({true, true, false}));
  EXPECT_FALSE(f.satisfied_by({true, true, true}));
  EXPECT_FALSE(is_satisfiable(parse(kUnsatDimacs)));
  EXPECT_THROW(f.satisfied_by({true}), InputError);
}

TEST(Formula, RandomGenerator) {
  std::mt19937_64 rng(3);
  EXPECT_THROW(random_exactly_twice_formula(4, rng), InputError);
  int unsat = 0;
  for (int t = 0; t < 200; ++t) {
    const auto f = random_exactly_twice_formula(3, rng);
    ASSERT_NO_THROW(f.validate());
    ASSERT_EQ(f.clauses.size(), 4u);
    for (const auto& c : f.clauses)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ASSERT_NE(c[i], -c[j]);
    unsat += !is_satisfiable(f);
  }
  EXPECT_GT(unsat, 0);
  EXPECT_EQ(random_exactly_twice_formula(6, rng).clauses.size(), 8u);
}

TEST(Reduction, SampleSizes) {
  const auto& inst = sample_instance();
  EXPECT_EQ(inst.problem.num_agents(), 234u);
  EXPECT_EQ(inst.layout.part_size(), 30u);
  EXPECT_EQ(inst.problem.num_houses(), 2u + 18u * 30u + 17u + 1u);
  EXPECT_EQ(inst.problem.house_name(inst.layout.slowdown(1)), "s1");
  EXPECT_EQ(inst.problem.house_name(inst.layout.slowdown(2)), "s2");
  EXPECT_EQ(inst.problem.house_name(inst.layout.prize()), "prize");
  EXPECT_EQ(inst.problem.house_name(inst.layout.consolation(2)), "cp2");
  for (Agent a = 0; a < inst.problem.num_agents(); ++a) EXPECT_TRUE(inst.problem.is_complete(a));
}

TEST(Reduction, SampleMainPartHeads) {
  const auto& inst = sample_instance();
  using V = std::vector<std::string>;
  EXPECT_EQ(names(inst, head_of(inst, "m", 9)),
            (V{"h1_x1_p1", "h1_nx1_p1", "s1", "h2_x2_p1", "h2_nx2_p1", "s2", "h3_x3_p1", "h3_nx3_p1", "prize"}));
  EXPECT_EQ(names(inst, head_of(inst, "m2", 3)), (V{"h1_x1_p2", "h1_nx1_p2", "s1"}));
  // triplets sit with the negations of the clause's literals
  EXPECT_EQ(names(inst, head_of(inst, "a1_x1_p1", 7)),
            (V{"h1_x1_p1", "h2_x1_p1", "h3_x1_p1", "c2_1_p1", "c2_2_p1", "c2_3_p1", "prize"}));
  EXPECT_EQ(names(inst, head_of(inst, "a2_x1_p1", 7))[3], "c4_1_p1");
  EXPECT_EQ(names(inst, head_of(inst, "a1_nx1_p1", 7))[3], "c1_1_p1");
  EXPECT_EQ(names(inst, head_of(inst, "a2_nx1_p1", 7))[3], "c3_1_p1");
  EXPECT_EQ(names(inst, head_of(inst, "a1_nx2_p3", 7)),
            (V{"h1_nx2_p3", "h2_nx2_p3", "h3_nx2_p3", "c1_1_p3", "c1_2_p3", "c1_3_p3", "cp3"}));
  const auto& L = inst.layout;
  EXPECT_EQ(inst.clause_owner[0][0], L.literal_agent(1, Formula3SAT::index(-1), 0));
  EXPECT_EQ(inst.clause_owner[2][1], L.literal_agent(1, Formula3SAT::index(2), 1));  // c2 took copy 0
}

// T recomputed from the closed form with alpha = 4, eps = 1/256.
TEST(Reduction, TargetFromClosedForm) {
  const auto& inst = sample_instance();
  EXPECT_EQ(inst.params.alpha, 4);
  EXPECT_EQ(inst.params.eps, Q("1/256"));
  const Rational eps = Q("1/256");
  Rational want = Q("25/27") + Q("4/9") * (Rational(4096) + 64 + 1 + 3 * eps) + Q("1/18") * (Rational(512) + 8);
  want.canonicalize();
  EXPECT_EQ(inst.target, want);
  EXPECT_EQ(target_utility(inst), want);
  const auto& u = inst.utility;
  const auto& L = inst.layout;
  EXPECT_EQ(u(L.prize()), 1);
  EXPECT_EQ(u(L.round(1, 1, 0)), 4096 + eps);
  EXPECT_EQ(u(L.round(1, 1, 1)), 4096);
  EXPECT_EQ(u(L.slowdown(2)), 8);
  EXPECT_EQ(u(L.clause(1, 0, 0)), inst.params.negligible);
}

TEST(Reduction, BumpOnNegativeLiteral) {
  auto p = default_params(3, 560);
  p.bump_positive = false;
  const auto inst = reduce_3sat(sample_formula(), p);
  EXPECT_EQ(inst.utility(inst.layout.round(1, 2, 3)), 64 + p.eps);
  EXPECT_EQ(inst.utility(inst.layout.round(1, 2, 2)), 64);
}

TEST(Reduction, SingleVariableTarget) {
  const ReductionLayout L{1, 0};
  const auto p = default_params(1, L.num_houses());
  const auto u = reduction_utility(L, p);
  Rational want = Q("25/27") + Q("4/9") * (1 + p.eps);
  want.canonicalize();
  EXPECT_EQ(target_utility(L, u), want);
}

TEST(Reduction, ParameterChecks) {
  auto p = default_params(3, 560);
  p.eps = 0;
  EXPECT_THROW(reduce_3sat(sample_formula(), p), InputError);
  p = default_params(3, 560);
  p.negligible = 1;
  EXPECT_THROW(reduce_3sat(sample_formula(), p), InputError);
}

TEST(Reduction, PrescribedReports) {
  const auto& inst = sample_instance();
  const auto a = prescribed_report(inst, {true, true, false});
  const auto b = prescribed_report(inst, {true, false, false});
  ASSERT_EQ(a.size(), 9u);
  int diffs = 0;
  for (std::size_t k = 0; k < a.size(); ++k) diffs += a[k] != b[k];
  EXPECT_EQ(diffs, 2);
  EXPECT_EQ(a[3], b[4]);
  EXPECT_EQ(a[4], b[3]);
  EXPECT_THROW(prescribed_report(inst, {true}), InputError);
}

TEST(Reduction, SampleReachesTargetExactlyWhenSatisfied) {
  const auto& inst = sample_instance();
  int reached = 0;
  for (unsigned long bits = 0; bits < 8; ++bits) {
    const auto a = assignment_from_bits(3, bits);
    const auto e = evaluate_assignment(inst, a);
    EXPECT_EQ(e.reaches_target, inst.formula.satisfied_by(a)) << "assignment " << bits;
    reached += e.reaches_target;
  }
  EXPECT_GT(reached, 0);
  EXPECT_TRUE(evaluate_assignment(inst, {true, true, false}).reaches_target);
  EXPECT_FALSE(evaluate_assignment(inst, {true, true, true}).reaches_target);
}

TEST(Reduction, TimingAuditOnSample) {
  const auto& inst = sample_instance();
  for (unsigned long bits = 0; bits < 8; ++bits) {
    const auto a = assignment_from_bits(3, bits);
    const auto audit = timing_audit(inst, a);
    ASSERT_TRUE(audit.ok()) << audit.failures.front().group;
    EXPECT_EQ(audit.round_costs, (std::vector<Rational>{Q("1/2"), Q("1/2"), Q("4/9")}));
    EXPECT_EQ(audit.clause_round_start, Q("13/9"));
    EXPECT_GE(audit.solo_prize_time, Q("8/9"));
    EXPECT_LE(audit.distinct_group_times, 16u);
    EXPECT_EQ(audit.leads.size(), 12u);
    for (std::size_t lit = 0; lit < 6; ++lit) {
      const bool is_true = a[lit / 2] == (lit % 2 == 0);
      EXPECT_EQ(audit.leads.at(inst.layout.literal_agent(1, lit, 0)), is_true ? Q("1/9") : Rational(0));
    }
  }
}

TEST(Reduction, VerifyUnsatisfiable) {
  const auto v = verify_reduction(parse(kUnsatDimacs));
  EXPECT_FALSE(v.satisfiable);
  EXPECT_FALSE(v.target_reachable);
  EXPECT_TRUE(v.timing_ok);
  EXPECT_TRUE(v.passed());
  EXPECT_EQ(v.alpha_doublings, 0u);
  EXPECT_EQ(v.sweep.size(), 8u);
}

TEST(Reduction, VerifyRandomFormulasBothBumps) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 6; ++t) {
    const auto f = random_exactly_twice_formula(3, rng);
    for (const bool bump : {true, false}) {
      VerifyOptions opt;
      opt.bump_positive = bump;
      opt.jobs = 2;
      const auto v = verify_reduction(f, opt);
      EXPECT_TRUE(v.passed()) << f.to_dimacs();
      EXPECT_EQ(v.alpha_doublings, 0u);
    }
  }
}

// A fixed large eps can break equivalence; alpha then doubles up to the limit.
TEST(Reduction, AlphaDoublesOnFailure) {
  std::mt19937_64 rng(2);
  VerifyOptions opt;
  opt.eps = Q("1/64");
  opt.max_doublings = 2;
  for (int t = 0; t < 60; ++t) {
    const auto f = random_exactly_twice_formula(3, rng);
    const auto v = verify_reduction(f, opt);
    if (v.passed()) continue;
    EXPECT_EQ(v.alpha_doublings, 2u);
    EXPECT_EQ(v.params.alpha, 16);
    EXPECT_EQ(v.params.eps, Q("1/64"));
    return;
  }
  GTEST_SKIP() << "no formula failed at eps = 1/64";
}
