#include "lossylearn/report.hpp"

#include <cmath>

#include "lossylearn/scenario.hpp"

namespace lossylearn {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string cell(double v) {
  if (std::isfinite(v)) return decimal(v);
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

namespace {

Json matrix(const Kernel& k) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < k.rows(); ++i) {
    Json r = Json::array();
    for (double v : k.row(i)) r.push_back(number(v));
    rows.push_back(std::move(r));
  }
  return Json{{"from", k.from()}, {"to", k.to()}, {"p", std::move(rows)}};
}

template <class T>
Json optional_value(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>) {
    return number(*v);
  } else {
    return *v;
  }
}

}  // namespace

Json to_json(const Endpoints& e) {
  return Json{{"d_min", number(e.d_min)},
              {"d_max", e.d_max_infinite ? Json("inf") : number(e.d_max)},
              {"d_max_infinite", e.d_max_infinite}};
}

Json to_json(const RDSolution& s, bool with_kernel) {
  Json j{{"n", s.n},
         {"d", number(s.d)},
         {"rate_bits", number(s.rate_bits)},
         {"lambda_star", number(s.lambda_star)},
         {"achieved_d", number(s.achieved_distortion)},
         {"regime", to_string(s.regime)},
         {"flagged", s.flagged},
         {"flag_reason", s.flag_reason},
         {"endpoints", to_json(s.endpoints)},
         {"solver",
          {{"iterations", s.meta.iterations},
           {"lambda_evaluations", s.meta.lambda_evaluations},
           {"gradient_gap_nats", number(s.meta.gradient_gap)},
           {"duality_gap_bits", number(s.meta.duality_gap_bits)},
           {"lambda_lo_bits", number(s.meta.lambda_lo_bits)},
           {"lambda_hi_bits", number(s.meta.lambda_hi_bits)},
           {"entropy_regularizer", number(s.meta.entropy_regularizer)},
           {"tie_break", s.meta.tie_break}}}};
  if (with_kernel) {
    j["sampling_kernel"] = matrix(s.kernel);
    j["channel"] = matrix(s.channel);
  }
  return j;
}

Json to_json(const LambdaReport& r) {
  return Json{{"dual_bits", number(r.dual_bits)},
              {"finite_difference_bits", number(r.finite_difference_bits)},
              {"step", number(r.step)},
              {"one_sided", r.one_sided},
              {"agree", r.agree}};
}

Json to_json(const TiltedTable& t) {
  Json cells = Json::array();
  for (std::size_t w = 0; w < t.num_w(); ++w)
    for (std::size_t h = 0; h < t.num_h(); ++h) {
      if (t.mass(w, h) <= 0.0) continue;
      cells.push_back(Json{{"w", t.joint.axis(0)[w]},
                           {"h", t.joint.axis(1)[h]},
                           {"mass", number(t.mass(w, h))},
                           {"iota_bits", number(t.iota[w * t.num_h() + h])},
                           {"j_bits", number(t.at(w, h))}});
    }
  return Json{{"d", number(t.d)},
              {"lambda_star", number(t.lambda_star)},
              {"rate_bits", number(t.rate_bits)},
              {"expectation_bits", number(t.expectation())},
              {"cells", std::move(cells)}};
}

Json to_json(const DispersionReport& r, const Labels& worlds) {
  Json j{{"V", number(r.V)}, {"A3", number(r.A3)}, {"mean", number(r.mean)}, {"lambda_star", number(r.lambda_star)}};
  if (!r.decomposed) return j;
  j["V_in"] = number(r.V_in);
  j["V_bet"] = number(r.V_bet);
  auto per_world = [&](const std::vector<double>& v) {
    Json o = Json::object();
    for (std::size_t w = 0; w < worlds.size() && w < v.size(); ++w) o[worlds[w]] = number(v[w]);
    return o;
  };
  j["v_in_iota_S"] = per_world(r.v_in_iota_S);
  j["v_in_iota_A"] = per_world(r.v_in_iota_A);
  j["v_in_d_S"] = per_world(r.v_in_d_S);
  j["v_in_d_A"] = per_world(r.v_in_d_A);
  j["v_in_cov"] = per_world(r.v_in_cov);
  j["v_bet_iota"] = number(r.v_bet_iota);
  j["v_bet_d"] = number(r.v_bet_d);
  j["v_bet_cov"] = number(r.v_bet_cov);
  j["weights"] = Json{{"iota", number(r.weight_iota)}, {"d", number(r.weight_d)}, {"cov", number(r.weight_cov)}};
  return j;
}

Json to_json(const BoundReport& r) {
  Json comps = Json::object();
  for (const auto& [k, v] : r.components) comps[k] = number(v);
  return Json{{"kind", to_string(r.kind)},
              {"k", r.k},
              {"d", optional_value(r.d)},
              {"rate_bits", optional_value(r.rate_bits)},
              {"epsilon", optional_value(r.epsilon)},
              {"n", optional_value(r.n)},
              {"value", optional_value(r.value)},
              {"vacuous", r.vacuous},
              {"diagnostic", r.diagnostic},
              {"note", r.note},
              {"components", std::move(comps)}};
}

Json to_json(const ExcessResult& r, const LearningProblem& problem) {
  WorldTuples wt(problem.w, r.k, SIZE_MAX);
  DatasetUniverse u(problem, r.n, SIZE_MAX);
  Json choices = Json::object();
  for (std::size_t x = 0; x < r.argmin.size(); ++x) choices[wt.label(x)] = u.label(r.argmin[x]);
  return Json{{"k", r.k}, {"n", r.n}, {"d", number(r.d)}, {"excess", number(r.value)}, {"choices", std::move(choices)}};
}

Json to_json(const OracleReport& r, const LearningProblem& problem) {
  Json scan = Json::array();
  for (const auto& [n, v] : r.scan) scan.push_back(Json{{"n", n}, {"excess", number(v)}});
  Json j{{"k", r.k},
         {"d", number(r.d)},
         {"epsilon", number(r.epsilon)},
         {"n_max", r.n_max},
         {"method", r.method},
         {"n_star", r.n_star ? Json(*r.n_star) : Json(nullptr)},
         {"scan", std::move(scan)},
         {"note", r.note}};
  j["at_n_star"] = r.at_n_star ? to_json(*r.at_n_star, problem) : Json(nullptr);
  j["witness_below"] = r.below_n_star ? to_json(*r.below_n_star, problem) : Json(nullptr);
  return j;
}

Json to_json(const MonteCarloEstimate& m) {
  return Json{{"trials", m.trials},       {"seed", m.seed},          {"hits", m.hits},
              {"estimate", number(m.estimate)}, {"std_error", number(m.std_error)},
              {"ci_lo", number(m.ci_lo)}, {"ci_hi", number(m.ci_hi)}};
}

Json to_json(const VerifyPoint& p) {
  Json j{{"k", p.at.k},
         {"d", number(p.at.d)},
         {"epsilon", number(p.at.epsilon)},
         {"rate_n", p.rate_n},
         {"n_star", p.n_star ? Json(*p.n_star) : Json(nullptr)},
         {"bound_bits", optional_value(p.bound_bits)},
         {"oracle_bits", optional_value(p.oracle_bits)},
         {"margin_bits", optional_value(p.margin_bits)},
         {"status", to_string(p.status)},
         {"reason", p.reason}};
  if (p.eps_checked) {
    j["epsilon_check"] = Json{{"n", *p.n_star - 1},
                              {"oracle_excess", number(p.eps_oracle)},
                              {"bound_raw", number(p.eps_bound_raw)},
                              {"ok", p.eps_ok}};
  }
  return j;
}

Json to_json(const VerifyReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  return Json{{"summary",
               {{"points", r.points.size()},
                {"pass", r.passes},
                {"fail", r.failures},
                {"skipped_vacuous", r.vacuous},
                {"skipped_infeasible", r.infeasible},
                {"skipped_domain", r.domain},
                {"epsilon_checks", r.eps_checks},
                {"epsilon_failures", r.eps_failures},
                {"ok", r.ok()}}},
              {"points", std::move(pts)}};
}

Json to_json(const StabilityReport& r, const Labels& worlds) {
  Json per = Json::array();
  for (std::size_t w = 0; w < r.lhs.size(); ++w) {
    per.push_back(Json{{"w", worlds[w]},
                       {"variance_of_expected_distortion", number(r.lhs[w])},
                       {"expected_inner_variance", number(r.expected_inner_variance[w])}});
  }
  Json j{{"n", r.n}, {"beta", number(r.beta)}, {"rhs", number(r.rhs)}, {"holds", r.holds}, {"worlds", std::move(per)}};
  if (r.rho) {
    j["rho"] = number(*r.rho);
    j["rho_rhs_n"] = number(*r.rho_rhs_n);
    j["rho_rhs_seed"] = number(*r.rho_rhs_seed);
  }
  return j;
}

Json to_json(const MiChainReport& r) {
  return Json{{"feasible", r.feasible},
              {"n", r.n},
              {"d", number(r.d)},
              {"rate_bits", number(r.rate_bits)},
              {"i_w_h_bits", number(r.i_w_h)},
              {"i_t_h_bits", number(r.i_t_h)},
              {"iid_distortion", number(r.iid_distortion)},
              {"holds", r.holds}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char c : f) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  out += '\n';
  return out;
}

}  // namespace lossylearn
