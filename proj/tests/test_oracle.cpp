#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace psm;
using namespace psm::test;

namespace {

const UtilityFunction kExampleUtility{{Rational(7), Rational(6), Rational(0)}};

}  // namespace

TEST(Oracle, ThreeByThreeEuBest) {
  const auto rep = brute_force_best_response(three_by_three(), Criterion::EU, &kExampleUtility);
  ASSERT_TRUE(rep.best_value);
  EXPECT_EQ(*rep.best_value, Q("11/2"));
  EXPECT_EQ(rep.best_allocations.front(), row({"1/2", "1/3", "1/6"}));
  EXPECT_EQ(rep.optimal_reports, (std::vector<HouseList>{L({2, 1, 3})}));
  EXPECT_FALSE(rep.truthful_is_optimal);
  EXPECT_EQ(rep.reports_examined, 6u);
  ASSERT_TRUE(rep.partial_list_improves);
  EXPECT_FALSE(*rep.partial_list_improves);
}

TEST(Oracle, ThreeByThreeDlIsTruthful) {
  const auto rep = brute_force_best_response(three_by_three(), Criterion::DL);
  EXPECT_TRUE(rep.truthful_is_optimal);
  EXPECT_EQ(rep.best_allocations.front(), row({"3/4", "0", "1/4"}));
  EXPECT_FALSE(rep.best_value);
}

TEST(Oracle, ThreeByThreeSdMaximalSet) {
  const auto rep = brute_force_best_response(three_by_three(), Criterion::SD);
  // truthful and (h2,h1,h3) are SD-incomparable; neither is dominated
  EXPECT_TRUE(rep.truthful_is_optimal);
  EXPECT_NE(std::find(rep.best_allocations.begin(), rep.best_allocations.end(), row({"1/2", "1/3", "1/6"})),
            rep.best_allocations.end());
  for (const auto& a : rep.best_allocations)
    for (const auto& b : rep.best_allocations)
      EXPECT_NE(sd_compare(a, b, L({1, 2, 3})), ComparisonResult::FirstPreferred);
}

TEST(Oracle, CapAndForce) {
  std::mt19937_64 rng(1);
  const auto p = AssignmentProblem::from_prefs(9, random_prefs(2, 9, rng));
  EXPECT_THROW(brute_force_best_response(p, Criterion::DL), InputError);
  OracleOptions small;
  small.cap = 2;
  EXPECT_THROW(brute_force_best_response(three_by_three(), Criterion::DL, nullptr, small), InputError);
  small.force = true;
  small.partial_sweep_limit = 0;
  EXPECT_EQ(brute_force_best_response(three_by_three(), Criterion::DL, nullptr, small).reports_examined, 6u);
}

TEST(Oracle, InputChecks) {
  EXPECT_THROW(brute_force_best_response(three_by_three(), Criterion::EU), InputError);
  const UtilityFunction short_u{{Rational(1)}};
  EXPECT_THROW(brute_force_best_response(three_by_three(), Criterion::EU, &short_u), InputError);
  const auto partial = AssignmentProblem::from_prefs(2, {L({1}), L({1, 2})});
  EXPECT_THROW(brute_force_best_response(partial, Criterion::DL), InputError);
  EXPECT_EQ(parse_criterion("EU"), Criterion::EU);
  EXPECT_THROW(parse_criterion("lex"), InputError);
}

TEST(Oracle, ThreadCountDoesNotChangeOutput) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const auto p = AssignmentProblem::from_prefs(6, random_prefs(3, 6, rng));
    OracleOptions one, four;
    four.jobs = 4;
    const auto a = all_report_outcomes(p, one), b = all_report_outcomes(p, four);
    ASSERT_EQ(a.size(), 720u);
    for (std::size_t k = 0; k < a.size(); ++k) {
      ASSERT_EQ(a[k].report, b[k].report);
      ASSERT_EQ(a[k].alloc, b[k].alloc);
    }
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                               [](const ReportOutcome& x, const ReportOutcome& y) { return x.report < y.report; }));
  }
}

TEST(Oracle, EveryReportIsEvaluatedByPs) {
  std::mt19937_64 rng(14);
  const auto p = AssignmentProblem::from_prefs(4, random_prefs(3, 4, rng));
  for (const auto& o : all_report_outcomes(p)) {
    std::vector<HouseList> lists{o.report, p.pref(1), p.pref(2)};
    EXPECT_EQ(o.alloc, reference_ps(lists, 4)[0]);
  }
}

TEST(Oracle, IsManipulableFlags) {
  const std::vector<UtilityFunction> us{kExampleUtility, UtilityFunction{{Rational(5), Rational(9), Rational(1)}},
                                        UtilityFunction{{Rational(1), Rational(9), Rational(5)}}};
  const auto eu = is_manipulable(three_by_three(), Criterion::EU, us);
  ASSERT_EQ(eu.size(), 3u);
  EXPECT_TRUE(eu[0]);
  EXPECT_THROW(is_manipulable(three_by_three(), Criterion::EU), InputError);
  // agent 1 of the two-agent worked example gains under DL
  EXPECT_TRUE(is_manipulable(two_agent_example(), Criterion::DL)[0]);
}

// A partial list never strictly beats the best complete report.
TEST(Oracle, PartialListsNeverHelp) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng() % 2, m = 2 + rng() % 3;
    const auto p = AssignmentProblem::from_prefs(m, random_prefs(n, m, rng));
    const auto u = random_consistent_utility(p.pref(0), rng);
    for (const Criterion c : {Criterion::EU, Criterion::DL, Criterion::SD}) {
      const auto rep = brute_force_best_response(p, c, &u);
      ASSERT_TRUE(rep.partial_list_improves);
      EXPECT_FALSE(*rep.partial_list_improves);
    }
  }
}
