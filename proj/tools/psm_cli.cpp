// psm: command-line front end for the probabilistic serial toolkit.

#include <psm/psm.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace psm;

struct Globals {
  std::uint64_t seed = 1;
  std::string format = "text";
  unsigned jobs = 1;
  bool structured() const { return format == "structured"; }
};

// Thrown to exit with a given status after printing a verdict.
struct ExitStatus {
  int code;
};

std::string join_houses(std::span<const House> list, const AssignmentProblem& p) {
  std::string s;
  for (const House h : list) {
    if (!s.empty()) s += ' ';
    s += p.house_name(h);
  }
  return s;
}

std::string row_text(std::span<const Rational> row, const AssignmentProblem& p) {
  std::string s;
  for (House h = 0; h < row.size(); ++h) {
    if (!s.empty()) s += "  ";
    s += p.house_name(h) + "=" + to_string(row[h]);
  }
  return s;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

AssignmentProblem select_agent(const AssignmentProblem& p, const std::string& name) {
  if (name.empty()) return p;
  const auto& names = p.agent_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("unknown agent '" + name + "'");
  return p.with_manipulator(static_cast<Agent>(it - names.begin()));
}

Formula3SAT load_cnf(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return Formula3SAT::parse_dimacs(in);
}

void cmd_ps(const Globals& g, const std::string& path, bool trace) {
  const auto inst = load_instance(path);
  const auto res = ps(inst.problem);
  const auto& p = inst.problem;
  if (g.structured()) {
    json j;
    j["assignment"] = assignment_json(res.assignment, p);
    if (trace) {
      j["trace"] = trace_json(res.trace, p);
    }
    print_json(j);
    return;
  }
  for (Agent i = 0; i < p.num_agents(); ++i) {
    std::cout << p.agent_name(i) << ": " << row_text(res.assignment.row_view(i), p) << '\n';
  }
  if (!trace) return;
  std::cout << "exhaustions:\n";
  for (const auto& e : res.trace.events) std::cout << "  t=" << to_string(e.time) << "  " << p.house_name(e.house) << '\n';
  std::cout << "intervals:\n";
  for (const auto& iv : res.trace.intervals) {
    std::cout << "  " << p.agent_name(iv.agent) << " ate " << p.house_name(iv.house) << " during ["
              << to_string(iv.begin) << ", " << to_string(iv.end) << ")\n";
  }
}

void cmd_est(const Globals& g, const std::string& path) {
  const auto inst = load_instance(path);
  const auto start = est(inst.problem);
  json j = json::object();
  for (House h = 0; h < start.size(); ++h) {
    j[inst.problem.house_name(h)] = start[h] ? rational_json(*start[h]) : json(nullptr);
  }
  if (g.structured()) {
    print_json(json{{"est", j}});
    return;
  }
  for (House h = 0; h < start.size(); ++h) {
    std::cout << inst.problem.house_name(h) << ": " << (start[h] ? to_string(*start[h]) : "never") << '\n';
  }
}

void cmd_dl_br(const Globals& g, const std::string& path, const std::string& agent, bool verify, bool rounds) {
  const auto inst = load_instance(path);
  const auto p = select_agent(inst.problem, agent);
  const auto br = dl_best_response(p);
  const Allocation row = br.assignment.row(kManipulator);
  std::optional<bool> agrees;
  if (verify) {
    OracleOptions opt;
    opt.jobs = g.jobs;
    const auto rep = brute_force_best_response(p, Criterion::DL, nullptr, opt);
    agrees = rep.best_allocations.front() == row;
  }
  if (g.structured()) {
    json j;
    j["agent"] = p.agent_name(kManipulator);
    j["report"] = house_list_json(br.report, p);
    j["allocation"] = row_json(row, p);
    if (rounds) {
      json rs = json::array();
      for (const auto& r : br.rounds) rs.push_back({{"round", r.round}, {"list", house_list_json(r.list, p)}});
      j["rounds"] = std::move(rs);
    }
    if (agrees) j["matches_oracle"] = *agrees;
    print_json(j);
  } else {
    std::cout << "agent: " << p.agent_name(kManipulator) << '\n';
    std::cout << "report: " << join_houses(br.report, p) << '\n';
    std::cout << "allocation: " << row_text(row, p) << '\n';
    if (rounds) {
      for (const auto& r : br.rounds) std::cout << "L" << r.round << ": " << join_houses(r.list, p) << '\n';
    }
    if (agrees) std::cout << "oracle: " << (*agrees ? "match" : "MISMATCH") << '\n';
  }
  if (agrees && !*agrees) throw ExitStatus{2};
}

void cmd_eu_br_2(const Globals& g, const std::string& path, const std::string& agent, bool verify) {
  const auto inst = load_instance(path);
  const auto p = select_agent(inst.problem, agent);
  const auto br = eu_best_response_2(p);
  const Allocation row = br.assignment.row(kManipulator);
  std::optional<bool> agrees;
  if (verify) {
    OracleOptions opt;
    opt.jobs = g.jobs;
    const bool eu = inst.utility && agent.empty();
    const auto rep = brute_force_best_response(p, eu ? Criterion::EU : Criterion::DL,
                                               eu ? &*inst.utility : nullptr, opt);
    agrees = eu ? eu_value(row, *inst.utility) == *rep.best_value : rep.best_allocations.front() == row;
  }
  if (g.structured()) {
    json j;
    j["agent"] = p.agent_name(kManipulator);
    j["report"] = house_list_json(br.report, p);
    j["allocation"] = row_json(row, p);
    if (inst.utility && agent.empty()) {
      j["expected_utility"] = rational_json(eu_value(row, *inst.utility));
      j["truthful_expected_utility"] = rational_json(eu_value(ps1(p.pref(kManipulator), p), *inst.utility));
    }
    if (agrees) j["matches_oracle"] = *agrees;
    print_json(j);
  } else {
    std::cout << "agent: " << p.agent_name(kManipulator) << '\n';
    std::cout << "report: " << join_houses(br.report, p) << '\n';
    std::cout << "allocation: " << row_text(row, p) << '\n';
    if (inst.utility && agent.empty()) {
      std::cout << "expected utility: " << to_string(eu_value(row, *inst.utility)) << " (truthful "
                << to_string(eu_value(ps1(p.pref(kManipulator), p), *inst.utility)) << ")\n";
    }
    if (agrees) std::cout << "oracle: " << (*agrees ? "match" : "MISMATCH") << '\n';
  }
  if (agrees && !*agrees) throw ExitStatus{2};
}

void cmd_oracle(const Globals& g, const std::string& path, const std::string& crit, const std::string& agent,
                bool force, std::size_t cap) {
  const auto inst = load_instance(path);
  const auto p = select_agent(inst.problem, agent);
  const Criterion c = parse_criterion(crit);
  if (c == Criterion::EU && !inst.utility) throw InputError("the eu criterion needs \"utility\" in the instance");
  if (c == Criterion::EU && !agent.empty()) throw InputError("the instance utility belongs to the first agent");
  OracleOptions opt;
  opt.cap = cap;
  opt.force = force;
  opt.jobs = g.jobs;
  const auto rep = brute_force_best_response(p, c, inst.utility ? &*inst.utility : nullptr, opt);
  if (g.structured()) {
    json j;
    j["agent"] = p.agent_name(kManipulator);
    j["criterion"] = std::string(to_string(c));
    if (rep.best_value) j["best_value"] = rational_json(*rep.best_value);
    json allocs = json::array();
    for (const auto& a : rep.best_allocations) allocs.push_back(row_json(a, p));
    j["best_allocations"] = std::move(allocs);
    json reports = json::array();
    for (const auto& r : rep.optimal_reports) reports.push_back(house_list_json(r, p));
    j["optimal_reports"] = std::move(reports);
    j["truthful_is_optimal"] = rep.truthful_is_optimal;
    j["reports_examined"] = rep.reports_examined;
    if (rep.partial_list_improves) j["partial_list_improves"] = *rep.partial_list_improves;
    print_json(j);
    return;
  }
  std::cout << "agent: " << p.agent_name(kManipulator) << ", criterion " << to_string(c) << ", "
            << rep.reports_examined << " reports\n";
  if (rep.best_value) std::cout << "best value: " << to_string(*rep.best_value) << '\n';
  for (const auto& a : rep.best_allocations) std::cout << "best allocation: " << row_text(a, p) << '\n';
  std::cout << "optimal reports (" << rep.optimal_reports.size() << "):\n";
  for (const auto& r : rep.optimal_reports) std::cout << "  " << join_houses(r, p) << '\n';
  std::cout << "truthful report optimal: " << (rep.truthful_is_optimal ? "yes" : "no") << '\n';
  if (rep.partial_list_improves) {
    std::cout << "some partial list improves: " << (*rep.partial_list_improves ? "yes" : "no") << '\n';
  }
}

struct ReductionFlags {
  std::string alpha, eps, bump = "positive";
};

VerifyOptions verify_options(const Globals& g, const ReductionFlags& f, std::size_t max_doublings) {
  VerifyOptions o;
  if (!f.alpha.empty()) o.alpha = parse_rational(f.alpha);
  if (!f.eps.empty()) o.eps = parse_rational(f.eps);
  o.bump_positive = f.bump == "positive";
  o.max_doublings = max_doublings;
  o.jobs = g.jobs;
  return o;
}

json params_json(const ReductionParams& p, const ReductionLayout& L) {
  return {{"alpha", rational_json(p.alpha)},
          {"eps", rational_json(p.eps)},
          {"negligible", rational_json(p.negligible)},
          {"bump", p.bump_positive ? "positive" : "negative"},
          {"variables", L.n},
          {"clauses", L.num_clauses}};
}

void cmd_reduce(const Globals& g, const std::string& cnf, const ReductionFlags& flags, std::string out,
                std::string sidecar, bool calibrate) {
  const Formula3SAT f = load_cnf(cnf);
  const ReductionLayout L{f.num_vars, f.clauses.size()};
  ReductionParams params = default_params(L.n, L.num_houses());
  if (!flags.alpha.empty()) params = default_params(L.n, L.num_houses(), parse_rational(flags.alpha));
  if (!flags.eps.empty()) params.eps = parse_rational(flags.eps);
  params.bump_positive = flags.bump == "positive";
  if (calibrate) {
    const auto v = verify_reduction(f, verify_options(g, flags, 8));
    if (!v.passed()) throw InputError("no alpha up to 2^8 times the start value passes the sweep");
    params = v.params;
  }
  const auto inst = reduce_3sat(f, params);

  const std::string stem = std::filesystem::path(cnf).stem().string();
  if (out.empty()) out = stem + ".instance.json";
  if (sidecar.empty()) sidecar = stem + ".utility.json";
  const json pj = params_json(inst.params, L);
  write_json_file(out, instance_to_json(inst.problem, nullptr, nullptr, pj));
  write_json_file(sidecar, json{{"agent", inst.problem.agent_name(kManipulator)},
                                {"utility", utility_to_json(inst.utility, inst.problem)},
                                {"target", rational_json(inst.target)},
                                {"params", pj}});
  if (g.structured()) {
    print_json({{"instance", out}, {"sidecar", sidecar}, {"agents", inst.problem.num_agents()},
                {"houses", inst.problem.num_houses()}, {"target", rational_json(inst.target)}, {"params", pj}});
    return;
  }
  std::cout << "wrote " << out << " (" << inst.problem.num_agents() << " agents, " << inst.problem.num_houses()
            << " houses)\nwrote " << sidecar << "\nalpha " << to_string(inst.params.alpha) << ", eps "
            << to_string(inst.params.eps) << ", target " << to_string(inst.target) << '\n';
}

void cmd_verify(const Globals& g, const std::string& cnf, const ReductionFlags& flags, std::size_t max_doublings) {
  const Formula3SAT f = load_cnf(cnf);
  const auto v = verify_reduction(f, verify_options(g, flags, max_doublings));
  if (g.structured()) {
    json sweep = json::array();
    for (const auto& e : v.sweep) {
      std::string bits;
      for (const bool b : e.assignment) bits += b ? '1' : '0';
      sweep.push_back({{"assignment", bits}, {"satisfies", e.satisfies}, {"utility", rational_json(e.utility)},
                       {"reaches_target", e.reaches_target}, {"timing_ok", e.timing_ok}});
    }
    print_json({{"satisfiable", v.satisfiable}, {"target_reachable", v.target_reachable},
                {"equivalent", v.equivalent()}, {"timing_ok", v.timing_ok},
                {"distinct_group_times", v.distinct_group_times}, {"alpha_doublings", v.alpha_doublings},
                {"params", params_json(v.params, ReductionLayout{f.num_vars, f.clauses.size()})},
                {"target", rational_json(v.target)}, {"sweep", sweep}, {"diagnostics", v.diagnostics}});
  } else {
    std::cout << "alpha " << to_string(v.params.alpha) << " (" << v.alpha_doublings << " doublings), eps "
              << to_string(v.params.eps) << '\n';
    std::cout << "assignment  satisfies  reaches T  timing  EU - T\n";
    for (const auto& e : v.sweep) {
      std::string bits;
      for (const bool b : e.assignment) bits += b ? '1' : '0';
      std::ostringstream gap;
      gap << std::scientific << std::setprecision(3) << Rational(e.utility - v.target).get_d();
      std::cout << std::left << std::setw(12) << bits << std::setw(11) << (e.satisfies ? "yes" : "no")
                << std::setw(11) << (e.reaches_target ? "yes" : "no") << std::setw(8) << (e.timing_ok ? "ok" : "FAIL")
                << gap.str() << '\n';
    }
    for (const auto& d : v.diagnostics) std::cout << "  " << d << '\n';
    std::cout << "satisfiable: " << (v.satisfiable ? "yes" : "no")
              << ", target reachable: " << (v.target_reachable ? "yes" : "no") << '\n';
    std::cout << "verdict: " << (v.passed() ? "EQUIVALENT" : "NOT EQUIVALENT") << '\n';
  }
  if (!v.passed()) throw ExitStatus{2};
}

void cmd_experiment(const Globals& g, ExperimentConfig cfg, const std::string& crit, const std::string& out) {
  cfg.criterion = parse_criterion(crit);
  cfg.seed = g.seed;
  cfg.jobs = g.jobs;
  const auto rep = run_experiment(cfg);
  if (!out.empty()) write_json_file(out, report_to_json(rep));
  if (g.structured()) {
    print_json(report_to_json(rep));
  } else {
    std::cout << report_table(rep);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic serial assignment: outcomes, best responses, oracle, hardness instances"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Root seed for random generation")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "structured"}))
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  std::string path, agent, crit = "dl", out, sidecar;
  bool trace = false, verify = false, rounds = false, force = false, calibrate = false;
  std::size_t cap = 8, max_doublings = 4;
  ReductionFlags rf;
  ExperimentConfig ecfg;

  auto* c_ps = app.add_subcommand("ps", "PS outcome of an instance");
  c_ps->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_ps->add_flag("--trace", trace, "Print exhaustion events and eating intervals");

  auto* c_est = app.add_subcommand("est", "Eating start time of every house");
  c_est->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);

  auto* c_dl = app.add_subcommand("dl-br", "Stingy DL best response");
  c_dl->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_dl->add_option("--agent", agent, "Manipulating agent (default: the first)");
  c_dl->add_flag("--verify", verify, "Check against the brute-force oracle");
  c_dl->add_flag("--rounds", rounds, "Print every intermediate list");

  auto* c_eu = app.add_subcommand("eu-br-2", "EU best response for two agents");
  c_eu->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_eu->add_option("--agent", agent, "Manipulating agent (default: the first)");
  c_eu->add_flag("--verify", verify, "Check against the brute-force oracle");

  auto* c_or = app.add_subcommand("oracle", "Brute-force best response over all complete reports");
  c_or->add_option("instance", path, "Instance JSON")->required()->check(CLI::ExistingFile);
  c_or->add_option("--criterion", crit, "eu, dl or sd")->capture_default_str();
  c_or->add_option("--agent", agent, "Manipulating agent (default: the first)");
  c_or->add_flag("--force", force, "Run past the house cap");
  c_or->add_option("--cap", cap, "Largest number of houses without --force")->capture_default_str();

  auto add_reduction_flags = [&](CLI::App* c) {
    c->add_option("cnf", path, "DIMACS CNF, every literal exactly twice")->required()->check(CLI::ExistingFile);
    c->add_option("--alpha", rf.alpha, "Gap base (integer or p/q)");
    c->add_option("--eps", rf.eps, "Tie-break bump (integer or p/q)");
    c->add_option("--bump", rf.bump, "Literal carrying the bump")
        ->check(CLI::IsMember({"positive", "negative"}))
        ->capture_default_str();
  };
  auto* c_red = app.add_subcommand("reduce-3sat", "Build the EU best-response instance of a formula");
  add_reduction_flags(c_red);
  c_red->add_option("-o,--output", out, "Instance file (default: <cnf>.instance.json)");
  c_red->add_option("--sidecar", sidecar, "Utility and target file (default: <cnf>.utility.json)");
  c_red->add_flag("--calibrate", calibrate, "Double alpha until the prescribed-play sweep passes");

  auto* c_ver = app.add_subcommand("verify-reduction", "Sweep every prescribed play against a truth table");
  add_reduction_flags(c_ver);
  c_ver->add_option("--max-doublings", max_doublings, "Alpha doublings allowed")->capture_default_str();

  auto* c_exp = app.add_subcommand("experiment", "Fraction of manipulable random profiles");
  c_exp->add_option("--n", ecfg.n_values, "Agent counts")->delimiter(',')->capture_default_str();
  c_exp->add_option("--m", ecfg.m_values, "House counts")->delimiter(',')->capture_default_str();
  c_exp->add_option("--trials", ecfg.trials, "Profiles per cell")->check(CLI::PositiveNumber)->capture_default_str();
  c_exp->add_option("--criterion", crit, "eu, dl or sd")->capture_default_str();
  c_exp->add_option("--oracle-max-m", ecfg.oracle_max_m, "Largest m for the oracle")->capture_default_str();
  c_exp->add_option("--out", out, "Also write the structured report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_ps) cmd_ps(g, path, trace);
    else if (*c_est) cmd_est(g, path);
    else if (*c_dl) cmd_dl_br(g, path, agent, verify, rounds);
    else if (*c_eu) cmd_eu_br_2(g, path, agent, verify);
    else if (*c_or) cmd_oracle(g, path, crit, agent, force, cap);
    else if (*c_red) cmd_reduce(g, path, rf, out, sidecar, calibrate);
    else if (*c_ver) cmd_verify(g, path, rf, max_doublings);
    else if (*c_exp) cmd_experiment(g, ecfg, crit, out);
  } catch (const ExitStatus& s) {
    return s.code;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
