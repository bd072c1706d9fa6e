#include "lossylearn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lossylearn/bounds.hpp"
#include "lossylearn/dispersion.hpp"
#include "lossylearn/error.hpp"
#include "lossylearn/oracle.hpp"
#include "lossylearn/rd.hpp"
#include "lossylearn/report.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string scenario;
  std::string out;
  std::string format = "json";
  std::string d_spec, k_spec, eps_spec;
  std::optional<std::size_t> n;
  std::size_t n_max = 6;
  std::uint64_t seed = 1;
  std::size_t trials = 100000;
  std::size_t cap = kDefaultEnumerationCap;
  std::optional<double> rate;
  std::string strategy = "optimal";
  std::string builtin_name;
};

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) throw UsageError("not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& spec) {
  std::vector<std::size_t> out;
  for (double v : parse_grid(spec)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("k must be a positive integer, got " + cell(v));
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<double> parse_eps(const std::string& spec) {
  auto v = parse_grid(spec);
  for (double e : v)
    if (!(e > 0.0 && e < 1.0)) throw UsageError("epsilon must lie in (0, 1), got " + cell(e));
  return v;
}

Scenario load(const RunConfig& cfg) {
  if (cfg.scenario.empty()) throw UsageError("--scenario is required");
  const std::string prefix = "builtin:";
  if (cfg.scenario.rfind(prefix, 0) == 0) return builtin_scenario(cfg.scenario.substr(prefix.size()));
  return load_scenario(cfg.scenario);
}

std::vector<double> require_grid(const RunConfig& cfg) {
  if (cfg.d_spec.empty()) throw UsageError("--d is required");
  auto g = parse_grid(cfg.d_spec);
  if (g.empty()) throw UsageError("--d grid is empty");
  return g;
}

std::string error_status(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::domain: return "domain_error";
    case ErrorKind::solver: return "solver_error";
    default: return std::string(to_string(e.kind())) + "_error";
  }
}

std::size_t rate_n(const RunConfig& cfg, const Scenario& s, double d) {
  return cfg.n ? *cfg.n : default_rate_n(s.problem, s.algorithm, d, cfg.cap);
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.cap = cfg.cap;
  return o;
}

struct Output {
  std::string text;
  int code = kOk;
};

Output cmd_solve(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto grid = require_grid(cfg);
  Output o;
  Json pts = Json::array();
  std::string csv = csv_line({"d", "rate_bits", "lambda_star", "achieved_d", "solver_iters", "status"});
  for (double d : grid) {
    try {
      const std::size_t n = rate_n(cfg, s, d);
      const RDSolution sol = rate_distortion(s.problem, s.algorithm, n, d, solver_options(cfg));
      Json j = to_json(sol);
      j["status"] = to_string(sol.regime);
      pts.push_back(std::move(j));
      csv += csv_line({cell(d), cell(sol.rate_bits), cell(sol.lambda_star), cell(sol.achieved_distortion),
                       std::to_string(sol.meta.iterations), to_string(sol.regime)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::domain) o.code = kComputeFailure;
      err << "d = " << cell(d) << ": " << e.what() << "\n";
      pts.push_back(Json{{"d", number(d)}, {"status", error_status(e)}, {"error", e.detail()}});
      csv += csv_line({cell(d), "", "", "", "", error_status(e)});
    }
  }
  o.text = cfg.format == "csv" ? csv : dump(Json{{"command", "solve"}, {"points", std::move(pts)}});
  return o;
}

Output cmd_dispersion(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto grid = require_grid(cfg);
  Output o;
  Json pts = Json::array();
  std::string csv = csv_line({"d", "n", "V", "V_in", "V_bet", "A3", "B", "lambda_star", "rate_bits"});
  for (double d : grid) {
    try {
      const std::size_t n = rate_n(cfg, s, d);
      const RDSolution sol = rate_distortion(s.problem, s.algorithm, n, d, solver_options(cfg));
      const TiltedTable t = tilted_information(s.problem, sol);
      const DispersionReport r = decompose_dispersion(s.problem, s.algorithm, sol, t);
      std::vector<double> pw(s.problem.w.probs().begin(), s.problem.w.probs().end());
      const double scale = std::max({1.0, std::abs(r.V), r.weight_d, std::abs(r.weight_cov)});
      if (std::abs(r.V - r.V_in - r.V_bet) > 1e-10 * scale ||
          std::abs(r.V_in - r.reconstructed_in(pw)) > 1e-10 * scale ||
          std::abs(r.V_bet - r.reconstructed_bet()) > 1e-10 * scale) {
        throw Error(ErrorKind::solver, "variance decomposition does not reassemble at d = " + cell(d));
      }
      std::optional<double> B;
      if (r.V > kZeroDispersion) B = berry_esseen_B(r);
      Json j{{"d", number(d)},
             {"n", n},
             {"rate_bits", number(sol.rate_bits)},
             {"lambda_star", number(sol.lambda_star)},
             {"tie_break", sol.meta.tie_break},
             {"tilted", to_json(t)},
             {"dispersion", to_json(r, s.problem.w.labels())},
             {"B", B ? number(*B) : Json(nullptr)}};
      Json diag = Json::object();
      try {
        diag["stability"] = to_json(stability_diagnostics(s.problem, s.algorithm, n, cfg.cap), s.problem.w.labels());
      } catch (const Error& e) {
        diag["stability"] = Json{{"unavailable", e.detail()}};
      }
      try {
        diag["mi_chain"] = to_json(mi_chain_diagnostics(s.problem, s.algorithm, d, 1, cfg.n_max, solver_options(cfg)));
      } catch (const Error& e) {
        diag["mi_chain"] = Json{{"unavailable", e.detail()}};
      }
      j["diagnostics"] = std::move(diag);
      pts.push_back(std::move(j));
      csv += csv_line({cell(d), std::to_string(n), cell(r.V), cell(r.V_in), cell(r.V_bet), cell(r.A3),
                       B ? cell(*B) : "", cell(sol.lambda_star), cell(sol.rate_bits)});
    } catch (const Error& e) {
      o.code = kComputeFailure;
      err << "d = " << cell(d) << ": " << e.what() << "\n";
      pts.push_back(Json{{"d", number(d)}, {"status", error_status(e)}, {"error", e.detail()}});
    }
  }
  o.text = cfg.format == "csv" ? csv : dump(Json{{"command", "dispersion"}, {"points", std::move(pts)}});
  return o;
}

constexpr std::size_t kEpsilonConverseMaxK = 8;

Output cmd_bound(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto ks = parse_sizes(cfg.k_spec.empty() ? "1" : cfg.k_spec);
  const auto eps = parse_eps(cfg.eps_spec.empty() ? "0.1" : cfg.eps_spec);
  if (cfg.d_spec.empty() && !cfg.rate) throw UsageError("bound needs --d or --rate");
  const auto grid = cfg.d_spec.empty() ? std::vector<double>{} : require_grid(cfg);
  Output o;
  Json items = Json::array();
  std::string csv = csv_line({"kind", "k", "d", "rate_bits", "epsilon", "n", "value", "vacuous", "diagnostic"});
  auto row = [&](const BoundReport& b) {
    csv += csv_line({to_string(b.kind), std::to_string(b.k), b.d ? cell(*b.d) : "", b.rate_bits ? cell(*b.rate_bits) : "",
                     b.epsilon ? cell(*b.epsilon) : "", b.n ? std::to_string(*b.n) : "",
                     b.value ? cell(*b.value) : "", b.vacuous ? "true" : "false", b.diagnostic ? "true" : "false"});
  };
  for (double d : grid) {
    try {
      const std::size_t n = rate_n(cfg, s, d);
      const RDSolution sol = rate_distortion(s.problem, s.algorithm, n, d, solver_options(cfg));
      const TiltedTable t = tilted_information(s.problem, sol);
      const DispersionReport r = rate_dispersion(t);
      for (std::size_t k : ks) {
        Json eps_items = Json::array();
        if (k <= kEpsilonConverseMaxK) {
          EpsilonOptions eo;
          eo.seed = cfg.seed;
          eo.trials = cfg.trials;
          for (std::size_t m = 0; m <= cfg.n_max; ++m) {
            const BoundReport b = epsilon_converse(s.problem, t, k, m, eo);
            row(b);
            eps_items.push_back(to_json(b));
          }
        }
        for (double e : eps) {
          const BoundReport ex = rate_converse_explicit(sol, r, k, e);
          const BoundReport as = rate_converse_asymptotic(sol, r, k, e);
          row(ex);
          row(as);
          const auto nlow = sample_complexity_lower(ex, s.problem, k);
          items.push_back(Json{{"d", number(d)},
                               {"k", k},
                               {"epsilon", number(e)},
                               {"rate_explicit", to_json(ex)},
                               {"rate_asymptotic", to_json(as)},
                               {"sample_complexity_lower", nlow ? Json(*nlow) : Json(nullptr)}});
        }
        if (!eps_items.empty()) items.push_back(Json{{"d", number(d)}, {"k", k}, {"epsilon_converse", std::move(eps_items)}});
      }
    } catch (const Error& e) {
      o.code = kComputeFailure;
      err << "d = " << cell(d) << ": " << e.what() << "\n";
      items.push_back(Json{{"d", number(d)}, {"status", error_status(e)}, {"error", e.detail()}});
    }
  }
  if (cfg.rate) {
    if (!cfg.n) throw UsageError("--rate needs --n");
    for (std::size_t k : ks)
      for (double e : eps) {
        try {
          const BoundReport b =
              distortion_converse(s.problem, s.algorithm, *cfg.n, *cfg.rate, k, e, solver_options(cfg));
          row(b);
          items.push_back(Json{{"k", k}, {"epsilon", number(e)}, {"distortion_asymptotic", to_json(b)}});
        } catch (const Error& ex) {
          o.code = kComputeFailure;
          err << "R = " << cell(*cfg.rate) << ": " << ex.what() << "\n";
          items.push_back(Json{{"rate_bits", number(*cfg.rate)}, {"status", error_status(ex)}, {"error", ex.detail()}});
        }
      }
  }
  o.text = cfg.format == "csv" ? csv : dump(Json{{"command", "bound"}, {"bounds", std::move(items)}});
  return o;
}

Output cmd_oracle(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto grid = require_grid(cfg);
  const auto ks = parse_sizes(cfg.k_spec.empty() ? "1" : cfg.k_spec);
  const auto eps = parse_eps(cfg.eps_spec.empty() ? "0.1" : cfg.eps_spec);
  Output o;
  Json items = Json::array();
  std::string csv = csv_line({"k", "d", "epsilon", "n_star", "excess_at_n_star", "excess_below", "note"});
  for (std::size_t k : ks)
    for (double d : grid)
      for (double e : eps) {
        try {
          const OracleReport r = min_sample_size(s.problem, s.algorithm, k, d, e, cfg.n_max, cfg.cap);
          Json j = to_json(r, s.problem);
          Json med = Json::array();
          for (const auto& [n, v] : r.scan) {
            (void)v;
            med.push_back(Json{{"n", n}, {"value", number(min_expected_distortion(s.problem, s.algorithm, k, n, cfg.cap))}});
          }
          j["min_expected_distortion"] = std::move(med);
          items.push_back(std::move(j));
          csv += csv_line({std::to_string(k), cell(d), cell(e), r.n_star ? std::to_string(*r.n_star) : "",
                           r.at_n_star ? cell(r.at_n_star->value) : "",
                           r.below_n_star ? cell(r.below_n_star->value) : "", r.note});
        } catch (const Error& ex) {
          o.code = kComputeFailure;
          err << "k = " << k << ", d = " << cell(d) << ": " << ex.what() << "\n";
          items.push_back(Json{{"k", k}, {"d", number(d)}, {"epsilon", number(e)}, {"error", ex.detail()}});
        }
      }
  o.text = cfg.format == "csv" ? csv : dump(Json{{"command", "oracle"}, {"points", std::move(items)}});
  return o;
}

std::vector<double> default_verify_d(const Scenario& s, std::size_t cap) {
  std::size_t n1 = SIZE_MAX;
  for (std::size_t n : s.algorithm.sizes())
    if (n > 0) {
      n1 = n;
      break;
    }
  if (n1 == SIZE_MAX) throw Error(ErrorKind::capability, "algorithm defines no non-empty dataset size");
  const Endpoints ep = rd_endpoints(s.problem, s.algorithm, n1, cap);
  const double top = ep.d_max_infinite ? s.problem.max_distortion() : ep.d_max;
  return {ep.d_min + 0.05, 0.5 * (ep.d_min + top)};
}

Output cmd_verify(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto ks = parse_sizes(cfg.k_spec.empty() ? "1,2,3" : cfg.k_spec);
  const auto eps = parse_eps(cfg.eps_spec.empty() ? "0.05,0.2" : cfg.eps_spec);
  const auto ds = cfg.d_spec.empty() ? default_verify_d(s, cfg.cap) : require_grid(cfg);
  std::vector<GridPoint> grid;
  for (std::size_t k : ks)
    for (double d : ds)
      for (double e : eps) grid.push_back(GridPoint{k, d, e});
  EpsilonOptions eo;
  eo.seed = cfg.seed;
  eo.trials = cfg.trials;
  const VerifyReport rep = verify_converse(s.problem, s.algorithm, grid, cfg.n_max, solver_options(cfg), eo);
  Output o;
  if (cfg.format == "csv") {
    o.text = csv_line({"k", "d", "epsilon", "n_star", "bound_bits", "oracle_bits", "margin_bits", "status"});
    for (const auto& p : rep.points) {
      o.text += csv_line({std::to_string(p.at.k), cell(p.at.d), cell(p.at.epsilon),
                          p.n_star ? std::to_string(*p.n_star) : "", p.bound_bits ? cell(*p.bound_bits) : "",
                          p.oracle_bits ? cell(*p.oracle_bits) : "", p.margin_bits ? cell(*p.margin_bits) : "",
                          to_string(p.status)});
    }
  } else {
    o.text = dump(Json{{"command", "verify"}, {"report", to_json(rep)}});
  }
  if (rep.passes == 0 && rep.failures == 0) {
    err << "warning: no point produced a checkable bound (" << rep.vacuous << " vacuous, " << rep.infeasible
        << " infeasible, " << rep.domain << " outside the curve)\n";
  }
  if (!rep.ok()) {
    err << "verification failed: " << rep.failures << " negative margins, " << rep.eps_failures
        << " epsilon-bound violations\n";
    o.code = kViolation;
  }
  return o;
}

Output cmd_simulate(const RunConfig& cfg, std::ostream& err) {
  const Scenario s = load(cfg);
  const auto grid = require_grid(cfg);
  const auto ks = parse_sizes(cfg.k_spec.empty() ? "1" : cfg.k_spec);
  if (cfg.strategy != "iid" && cfg.strategy != "optimal") throw UsageError("--strategy must be iid or optimal");
  if (cfg.trials < 100) throw UsageError("--trials must be at least 100");
  Output o;
  Json items = Json::array();
  std::string csv = csv_line({"k", "n", "d", "strategy", "trials", "seed", "hits", "estimate", "std_error", "ci_lo",
                              "ci_hi", "exact"});
  for (std::size_t k : ks)
    for (double d : grid) {
      try {
        const std::size_t n = cfg.n ? *cfg.n : k;
        Kernel strategy;
        if (cfg.strategy == "iid") {
          if (n != k) throw UsageError("the i.i.d. strategy draws one sample per opportunity: --n must equal k");
          strategy = iid_strategy(s.problem, k, cfg.cap);
        } else {
          const ExcessResult best = optimal_excess_probability(s.problem, s.algorithm, k, n, d, cfg.cap);
          strategy = strategy_kernel(s.problem, k, n, best.argmin, cfg.cap);
        }
        const MonteCarloEstimate m = monte_carlo_excess(s.problem, s.algorithm, strategy, k, n, d, cfg.trials, cfg.seed);
        std::optional<double> exact;
        try {
          exact = excess_for_strategy(s.problem, s.algorithm, strategy, k, n, d, cfg.cap);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::enumeration_cap) throw;
        }
        Json j{{"k", k}, {"n", n}, {"d", number(d)}, {"strategy", cfg.strategy}, {"estimate", to_json(m)},
               {"exact", exact ? number(*exact) : Json(nullptr)}};
        items.push_back(std::move(j));
        csv += csv_line({std::to_string(k), std::to_string(n), cell(d), cfg.strategy, std::to_string(m.trials),
                         std::to_string(m.seed), std::to_string(m.hits), cell(m.estimate), cell(m.std_error),
                         cell(m.ci_lo), cell(m.ci_hi), exact ? cell(*exact) : ""});
      } catch (const Error& e) {
        o.code = kComputeFailure;
        err << "k = " << k << ", d = " << cell(d) << ": " << e.what() << "\n";
        items.push_back(Json{{"k", k}, {"d", number(d)}, {"error", e.detail()}});
      }
    }
  o.text = cfg.format == "csv" ? csv : dump(Json{{"command", "simulate"}, {"runs", std::move(items)}});
  return o;
}

Output cmd_info(const RunConfig& cfg, std::ostream&) {
  const Scenario s = load(cfg);
  const auto& p = s.problem;
  Output o;
  Json sizes = Json::array();
  std::string csv = csv_line({"n", "datasets", "bits", "d_min", "d_max"});
  for (std::size_t n : s.algorithm.sizes()) {
    try {
      DatasetUniverse u(p, n, cfg.cap);
      const Endpoints ep = rd_endpoints(p, s.algorithm, n, cfg.cap);
      sizes.push_back(Json{{"n", n}, {"datasets", u.size()}, {"bits", number(u.bits())}, {"endpoints", to_json(ep)}});
      csv += csv_line({std::to_string(n), std::to_string(u.size()), cell(u.bits()), cell(ep.d_min),
                       ep.d_max_infinite ? "inf" : cell(ep.d_max)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::enumeration_cap) throw;
      sizes.push_back(Json{{"n", n}, {"unavailable", e.detail()}});
      csv += csv_line({std::to_string(n), "", "", "", ""});
    }
  }
  Json j{{"command", "info"},
         {"worlds", p.w.labels()},
         {"p_w", Json::array()},
         {"samples", p.samples},
         {"hypotheses", p.h},
         {"b_bits", number(p.b_bits)},
         {"max_distortion", number(p.max_distortion())},
         {"iid_law", p.iid.has_value()},
         {"deterministic_algorithm", s.algorithm.deterministic().has_value()},
         {"sizes", std::move(sizes)}};
  for (double v : p.w.probs()) j["p_w"].push_back(number(v));
  o.text = cfg.format == "csv" ? csv : dump(j);
  return o;
}

Output cmd_builtin(const RunConfig& cfg, std::ostream&) {
  Output o;
  o.text = save_scenario(builtin_scenario(cfg.builtin_name));
  return o;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool grid_opts) {
  sub->add_option("--scenario", cfg.scenario, "scenario JSON path, or builtin:NAME");
  sub->add_option("--out", cfg.out, "output path (default: standard output)");
  sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--cap", cfg.cap, "enumeration cap")->check(CLI::PositiveNumber);
  if (!grid_opts) return;
  sub->add_option("--d", cfg.d_spec, "distortion list a,b,c or lo:hi:num");
  sub->add_option("--k", cfg.k_spec, "sampling opportunities, list or range");
  sub->add_option("--eps", cfg.eps_spec, "excess probabilities in (0, 1)");
  sub->add_option("--n", cfg.n, "dataset size for the rate program (default: smallest n with d_min(n) < d)");
  sub->add_option("--n-max", cfg.n_max, "largest dataset size the oracle scans");
  sub->add_option("--seed", cfg.seed, "64-bit seed");
  sub->add_option("--trials", cfg.trials, "Monte Carlo trials");
  sub->add_option("--rate", cfg.rate, "rate in bits (distortion bound)");
  sub->add_option("--strategy", cfg.strategy, "iid or optimal (simulate)");
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw UsageError("range must be lo:hi:num, got '" + spec + "'");
    const double lo = parse_double(parts[0]), hi = parse_double(parts[1]), num = parse_double(parts[2]);
    if (!(num >= 1.0) || num != std::floor(num) || num > 1e6) throw UsageError("range count must be a positive integer");
    const auto m = static_cast<std::size_t>(num);
    for (std::size_t i = 0; i < m; ++i) {
      out.push_back(m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1));
    }
    if (m > 1) out.back() = hi;
    return out;
  }
  for (const auto& part : split(spec, ',')) out.push_back(parse_double(part));
  if (out.empty()) throw UsageError("empty grid");
  for (double v : out)
    if (!std::isfinite(v)) throw UsageError("grid values must be finite");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lossylearn: fixed-decoder rate-distortion, dispersion and converse bounds for finite learning problems"};
  app.name("lossylearn");
  app.require_subcommand(1);
  RunConfig cfg;
  struct Command {
    const char* name;
    const char* help;
    Output (*fn)(const RunConfig&, std::ostream&);
    bool grid;
  };
  const Command commands[] = {
      {"solve", "rate-distortion curve over a d grid", cmd_solve, true},
      {"dispersion", "tilted information, dispersion and its decomposition", cmd_dispersion, true},
      {"bound", "converse bounds", cmd_bound, true},
      {"oracle", "exact minimum sample size and excess probability", cmd_oracle, true},
      {"verify", "check the explicit converse against the oracle", cmd_verify, true},
      {"simulate", "Monte Carlo excess probability of a strategy", cmd_simulate, true},
      {"info", "d_min, d_max, b and |T_n| per dataset size", cmd_info, false},
      {"builtin", "print a built-in scenario as JSON", cmd_builtin, false},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub, cfg, c.grid);
    if (std::string(c.name) == "builtin") sub->add_option("name", cfg.builtin_name, "sym2 or skew2")->required();
    subs.emplace_back(sub, &c);
  }

  std::vector<const char*> argv{"lossylearn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Output result;
    for (const auto& [sub, c] : subs)
      if (sub->parsed()) result = c->fn(cfg, err);
    if (cfg.out.empty()) {
      out << result.text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw Error(ErrorKind::io, "cannot open '" + cfg.out + "' for writing");
      f << result.text;
      if (!f) throw Error(ErrorKind::io, "failed writing '" + cfg.out + "'");
    }
    return result.code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.kind() == ErrorKind::io ? kUsage : kComputeFailure;
  }
}

}  // namespace lossylearn::cli
