#pragma once

#include <psm/dl_best_response.hpp>
#include <psm/instance_io.hpp>
#include <psm/oracle.hpp>
#include <psm/sequential_allocation.hpp>

#include <algorithm>
#include <cstdint>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace psm {

/// Every agent ranks the houses by an independent uniform permutation.
template <typename Rng>
AssignmentProblem random_profile(std::size_t n, std::size_t m, Rng& rng) {
  if (n == 0 || m == 0) throw InputError("a random profile needs n, m >= 1");
  std::vector<HouseList> prefs(n, identity_order(m));
  for (auto& p : prefs) std::shuffle(p.begin(), p.end(), rng);
  return AssignmentProblem::from_prefs(m, std::move(prefs));
}

/// Distinct integer utilities in [1, 10m], decreasing along `pref`.
template <typename Rng>
UtilityFunction random_consistent_utility(std::span<const House> pref, Rng& rng) {
  const std::size_t m = pref.size();
  std::vector<long> pool(10 * m);
  std::iota(pool.begin(), pool.end(), 1L);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(m);
  std::sort(pool.rbegin(), pool.rend());
  UtilityFunction u{std::vector<Rational>(m)};
  for (std::size_t k = 0; k < m; ++k) u.values[pref[k]] = pool[k];
  return u;
}

/// Independent generator for trial `trial` of cell `cell`; never depends on
/// how trials are spread over threads.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t cell, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

struct ExperimentConfig {
  std::vector<std::size_t> n_values{2, 3};
  std::vector<std::size_t> m_values{3, 4, 5, 6};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  Criterion criterion = Criterion::DL;
  unsigned jobs = 1;
  /// Largest m handed to the brute-force oracle.
  std::size_t oracle_max_m = 6;
};

struct CellResult {
  std::size_t n = 0, m = 0, trials = 0;
  std::string method;
  std::size_t manipulable_profiles = 0;
  /// (trial, agent) pairs where the agent can gain by deviating alone.
  std::size_t manipulations = 0;
  std::size_t welfare_decreases = 0;
  std::size_t welfare_increases = 0;
  /// Sum over manipulations of (welfare after - welfare before).
  Rational welfare_delta_sum = 0;

  Rational fraction() const {
    if (trials == 0) return 0;
    Rational f{mpz_class(manipulable_profiles), mpz_class(trials)};
    f.canonicalize();
    return f;
  }
  Rational mean_welfare_delta() const {
    return manipulations ? Rational(welfare_delta_sum / manipulations) : Rational(0);
  }
  bool operator==(const CellResult&) const = default;
};

struct SkippedCell {
  std::size_t n = 0, m = 0;
  std::string reason;
  bool operator==(const SkippedCell&) const = default;
};

struct ExperimentReport {
  Criterion criterion = Criterion::DL;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<CellResult> cells;
  std::vector<SkippedCell> skipped;
  bool operator==(const ExperimentReport&) const = default;

  /// For each n: is the manipulable fraction non-decreasing in m?
  std::map<std::size_t, bool> trend() const {
    std::map<std::size_t, bool> out;
    std::map<std::size_t, Rational> last;
    for (const auto& c : cells) {
      auto [it, fresh] = out.emplace(c.n, true);
      if (!fresh && c.fraction() < last[c.n]) it->second = false;
      last[c.n] = c.fraction();
    }
    return out;
  }
};

namespace detail {

// How manipulability is detected for a cell, or empty when none is feasible.
inline std::string detection_method(Criterion c, std::size_t n, std::size_t m, std::size_t oracle_max_m) {
  if (c == Criterion::DL) return "dl-br";
  if (c == Criterion::EU && n == 2) return "eu-br-2";
  if (m <= oracle_max_m) return "oracle";
  return {};
}

struct TrialOutcome {
  bool manipulable = false;
  std::size_t manipulations = 0, decreases = 0, increases = 0;
  Rational delta = 0;
};

inline Rational welfare(const FractionalAssignment& p, std::span<const UtilityFunction> us) {
  Rational w = 0;
  for (Agent i = 0; i < p.num_agents(); ++i) w += eu_value(p.row_view(i), us[i]);
  return w;
}

/// The agent's best deviation, or nullopt when truth-telling is optimal.
inline std::optional<HouseList> best_deviation(const AssignmentProblem& relabeled, const std::string& method,
                                               Criterion c, const UtilityFunction& u,
                                               const Allocation& truthful) {
  const HouseList& truth = relabeled.pref(kManipulator);
  if (method == "dl-br") {
    auto br = dl_best_response(relabeled, truth);
    if (dl_compare(br.assignment.row_view(kManipulator), truthful, truth) != ComparisonResult::FirstPreferred)
      return std::nullopt;
    return br.report;
  }
  if (method == "eu-br-2") {
    auto br = eu_best_response_2(relabeled, truth);
    if (eu_value(br.assignment.row_view(kManipulator), u) <= eu_value(truthful, u)) return std::nullopt;
    return br.report;
  }
  OracleOptions opt;
  opt.partial_sweep_limit = 0;
  const auto rep = brute_force_best_response(relabeled, c, c == Criterion::EU ? &u : nullptr, opt);
  if (rep.truthful_is_optimal) return std::nullopt;
  // Among optimal reports take the first that is a strict improvement.
  for (const auto& r : rep.optimal_reports) {
    const Allocation a = ps1(r, relabeled);
    const bool better = c == Criterion::EU ? eu_value(a, u) > eu_value(truthful, u)
                                           : sd_compare(a, truthful, truth) == ComparisonResult::FirstPreferred;
    if (better) return r;
  }
  return rep.optimal_reports.front();
}

template <typename Rng>
TrialOutcome run_trial(std::size_t n, std::size_t m, const std::string& method, Criterion c, Rng& rng) {
  const AssignmentProblem problem = random_profile(n, m, rng);
  std::vector<UtilityFunction> us;
  for (Agent i = 0; i < n; ++i) us.push_back(random_consistent_utility(problem.pref(i), rng));
  const FractionalAssignment truthful = ps(problem).assignment;
  const Rational before = welfare(truthful, us);

  TrialOutcome out;
  for (Agent i = 0; i < n; ++i) {
    const AssignmentProblem relabeled = problem.with_manipulator(i);
    const auto dev = best_deviation(relabeled, method, c, us[i], truthful.row(i));
    if (!dev) continue;
    out.manipulable = true;
    ++out.manipulations;
    // Deviations may be partial lists, so evaluate in the relabeled problem.
    std::vector<UtilityFunction> swapped = us;
    std::swap(swapped[kManipulator], swapped[i]);
    const FractionalAssignment after = ps_with_report(relabeled, *dev).assignment;
    const Rational d = welfare(after, swapped) - before;
    out.decreases += sgn(d) < 0;
    out.increases += sgn(d) > 0;
    out.delta += d;
  }
  return out;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw InputError("trials must be at least 1");
  ExperimentReport rep;
  rep.criterion = cfg.criterion;
  rep.seed = cfg.seed;
  rep.trials = cfg.trials;
  std::size_t cell = 0;
  for (const std::size_t n : cfg.n_values) {
    for (const std::size_t m : cfg.m_values) {
      const std::size_t cell_id = cell++;
      if (n == 0 || m == 0) {
        rep.skipped.push_back({n, m, "n and m must be at least 1"});
        continue;
      }
      const std::string method = detail::detection_method(cfg.criterion, n, m, cfg.oracle_max_m);
      if (method.empty()) {
        rep.skipped.push_back({n, m,
                               "no polynomial detector for " + std::string(to_string(cfg.criterion)) +
                                   " with n >= 3, and m exceeds the oracle limit of " +
                                   std::to_string(cfg.oracle_max_m)});
        continue;
      }
      std::vector<detail::TrialOutcome> outcomes(cfg.trials);
      const unsigned jobs = std::max(1u, cfg.jobs);
      std::vector<std::future<void>> workers;
      for (unsigned w = 0; w < jobs; ++w) {
        workers.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, [&, w] {
          for (std::size_t t = w; t < cfg.trials; t += jobs) {
            auto rng = trial_rng(cfg.seed, cell_id, t);
            outcomes[t] = detail::run_trial(n, m, method, cfg.criterion, rng);
          }
        }));
      }
      for (auto& f : workers) f.get();

      CellResult c{n, m, cfg.trials, method};
      for (const auto& o : outcomes) {
        c.manipulable_profiles += o.manipulable;
        c.manipulations += o.manipulations;
        c.welfare_decreases += o.decreases;
        c.welfare_increases += o.increases;
        c.welfare_delta_sum += o.delta;
      }
      c.welfare_delta_sum.canonicalize();
      rep.cells.push_back(std::move(c));
    }
  }
  return rep;
}

inline json report_to_json(const ExperimentReport& r) {
  json j;
  j["criterion"] = std::string(to_string(r.criterion));
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"n", c.n},
                     {"m", c.m},
                     {"trials", c.trials},
                     {"method", c.method},
                     {"manipulable_profiles", c.manipulable_profiles},
                     {"fraction", rational_json(c.fraction())},
                     {"manipulations", c.manipulations},
                     {"welfare_decreases", c.welfare_decreases},
                     {"welfare_increases", c.welfare_increases},
                     {"welfare_delta_sum", rational_json(c.welfare_delta_sum)}});
  }
  j["cells"] = std::move(cells);
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"n", s.n}, {"m", s.m}, {"reason", s.reason}});
  j["skipped"] = std::move(skipped);
  json trend = json::object();
  for (const auto& [n, ok] : r.trend()) trend[std::to_string(n)] = ok;
  j["non_decreasing_in_m"] = std::move(trend);
  return j;
}

inline ExperimentReport report_from_json(const json& j) {
  try {
    ExperimentReport r;
    r.criterion = parse_criterion(j.at("criterion").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.trials = j.at("trials").get<std::size_t>();
    for (const auto& c : j.at("cells")) {
      CellResult cr;
      cr.n = c.at("n").get<std::size_t>();
      cr.m = c.at("m").get<std::size_t>();
      cr.trials = c.at("trials").get<std::size_t>();
      cr.method = c.at("method").get<std::string>();
      cr.manipulable_profiles = c.at("manipulable_profiles").get<std::size_t>();
      cr.manipulations = c.at("manipulations").get<std::size_t>();
      cr.welfare_decreases = c.at("welfare_decreases").get<std::size_t>();
      cr.welfare_increases = c.at("welfare_increases").get<std::size_t>();
      cr.welfare_delta_sum = rational_from_json(c.at("welfare_delta_sum"), "welfare_delta_sum");
      r.cells.push_back(std::move(cr));
    }
    for (const auto& s : j.at("skipped")) {
      r.skipped.push_back({s.at("n").get<std::size_t>(), s.at("m").get<std::size_t>(),
                           s.at("reason").get<std::string>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed experiment report: ") + e.what());
  }
}

inline std::string report_table(const ExperimentReport& r) {
  std::ostringstream out;
  out << "criterion " << to_string(r.criterion) << ", seed " << r.seed << ", " << r.trials
      << " trials per cell\n";
  out << std::left << std::setw(4) << "n" << std::setw(4) << "m" << std::setw(9) << "method" << std::right
      << std::setw(12) << "manip" << std::setw(10) << "frac" << std::setw(8) << "w-" << std::setw(8) << "w+"
      << std::setw(14) << "mean dW" << '\n';
  for (const auto& c : r.cells) {
    std::ostringstream frac, mean;
    frac << std::fixed << std::setprecision(3) << c.fraction().get_d();
    mean << std::fixed << std::setprecision(4) << c.mean_welfare_delta().get_d();
    out << std::left << std::setw(4) << c.n << std::setw(4) << c.m << std::setw(9) << c.method << std::right
        << std::setw(12) << (std::to_string(c.manipulable_profiles) + "/" + std::to_string(c.trials))
        << std::setw(10) << frac.str() << std::setw(8) << c.welfare_decreases << std::setw(8)
        << c.welfare_increases << std::setw(14) << mean.str() << '\n';
  }
  for (const auto& s : r.skipped) out << "skipped n=" << s.n << " m=" << s.m << ": " << s.reason << '\n';
  for (const auto& [n, ok] : r.trend()) {
    out << "n=" << n << ": fraction " << (ok ? "non-decreasing" : "not monotone") << " in m\n";
  }
  return out.str();
}

}  // namespace psm
