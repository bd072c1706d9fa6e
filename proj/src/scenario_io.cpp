#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lossylearn/error.hpp"
#include "lossylearn/scenario.hpp"

namespace lossylearn {

using json = nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::schema, path + ": " + msg);
}

template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.detail());
  }
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(path, "missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) schema(path, "expected a decimal string");
  const std::string s = v.get<std::string>();
  if (s.empty()) schema(path, "empty decimal string");
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(d)) {
    schema(path, "'" + s + "' is not a finite decimal");
  }
  return d;
}

std::vector<double> vec(const json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Row-major flattening of a matrix with exactly `rows` x `cols` entries.
std::vector<double> matrix(const json& v, std::size_t rows, std::size_t cols, const std::string& path) {
  if (!v.is_array() || v.size() != rows) {
    schema(path, "expected " + std::to_string(rows) + " rows");
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    auto r = vec(v[i], rp);
    if (r.size() != cols) schema(rp, "expected " + std::to_string(cols) + " columns");
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

Labels labels(const json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array of strings");
  Labels out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

std::size_t index_in(const Labels& ls, const std::string& l, const std::string& path) {
  for (std::size_t i = 0; i < ls.size(); ++i)
    if (ls[i] == l) return i;
  schema(path, "unknown label '" + l + "'");
}

Kernel read_kernel(const json& v, const Labels& from, const Labels& to, const std::string& path) {
  auto m = matrix(v, from.size(), to.size(), path);
  return at_path(path, [&] { return Kernel(from, to, std::move(m)); });
}

std::size_t parse_size(const std::string& key, const std::string& path) {
  if (key.empty() || key.find_first_not_of("0123456789") != std::string::npos || key.size() > 6) {
    schema(path, "dataset size '" + key + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(std::stoul(key));
}

json dec_array(std::span<const double> xs) {
  json a = json::array();
  for (double x : xs) a.push_back(decimal(x));
  return a;
}

json dec_matrix(std::span<const double> data, std::size_t cols) {
  json a = json::array();
  for (std::size_t i = 0; i * cols < data.size(); ++i) a.push_back(dec_array(data.subspan(i * cols, cols)));
  return a;
}

bool scalar(const json& v) { return !v.is_array() && !v.is_object(); }

void emit(const json& v, std::size_t indent, std::string& out) {
  const std::string pad(indent, ' ');
  if (v.is_object()) {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad + "  " + json(it.key()).dump() + ": ";
      emit(it.value(), indent + 2, out);
    }
    out += "\n" + pad + "}";
  } else if (v.is_array()) {
    if (std::all_of(v.begin(), v.end(), scalar)) {
      out += "[";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += v[i].dump();
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ",\n";
      out += pad + "  ";
      emit(v[i], indent + 2, out);
    }
    out += "\n" + pad + "]";
  } else {
    out += v.dump();
  }
}

}  // namespace

std::string save_scenario(const Scenario& s) {
  const LearningProblem& p = s.problem;
  json root = json::object();
  root["version"] = 1;
  root["w"] = {{"labels", p.w.labels()}, {"p", dec_array(p.w.probs())}};
  json samples = {{"labels", p.samples}};
  if (p.b_explicit) samples["b_bits"] = decimal(p.b_bits);
  root["samples"] = samples;
  json obs = json::object();
  for (std::size_t w = 0; w < p.num_w(); ++w) {
    json list = json::array();
    for (std::size_t j = 0; j < p.num_samples(); ++j)
      if (p.observable[w][j]) list.push_back(p.samples[j]);
    obs[p.w.labels()[w]] = list;
  }
  root["observable"] = obs;
  root["h"] = {{"labels", p.h}};
  if (p.generative) {
    const GenerativeSpec& g = *p.generative;
    json gen = json::object();
    gen["x"] = g.p_x_given_w.to();
    gen["y"] = g.p_y_given_x.to();
    gen["p_x_given_w"] = dec_matrix(g.p_x_given_w.data(), g.p_x_given_w.cols());
    gen["p_y_given_x"] = dec_matrix(g.p_y_given_x.data(), g.p_y_given_x.cols());
    json hyp = json::object();
    for (std::size_t h = 0; h < p.num_h(); ++h) hyp[p.h[h]] = dec_matrix(g.hypotheses[h].data(), g.hypotheses[h].cols());
    gen["hypotheses"] = hyp;
    gen["mode"] = g.mode == DistortionMode::kl ? "kl" : "loss";
    if (g.mode == DistortionMode::loss) gen["loss"] = dec_matrix(g.loss, g.p_y_given_x.cols());
    root["generative"] = gen;
  } else {
    root["distortion"] = dec_matrix(p.distortion, p.num_h());
    if (p.iid) root["iid"] = {{"p", dec_matrix(p.iid->data(), p.iid->cols())}};
  }
  json alg = json::object();
  if (s.algorithm.deterministic()) {
    const DeterministicMap& d = *s.algorithm.deterministic();
    json det = json::object();
    det["seed_p"] = dec_array(d.seed.probs());
    det["seed_len"] = d.seed_len;
    json maps = json::object();
    const std::size_t R = d.seed_vectors();
    for (const auto& [n, table] : d.map) {
      json rows = json::array();
      for (std::size_t t = 0; t * R < table.size(); ++t) {
        json row = json::array();
        for (std::size_t r = 0; r < R; ++r) row.push_back(p.h[table[t * R + r]]);
        rows.push_back(row);
      }
      maps[std::to_string(n)] = rows;
    }
    det["map"] = maps;
    alg["deterministic"] = det;
  } else {
    for (const auto& [n, k] : s.algorithm.kernels()) alg[std::to_string(n)] = dec_matrix(k.data(), k.cols());
  }
  root["algorithm"] = alg;
  std::string out;
  emit(root, 0, out);
  out += "\n";
  return out;
}

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::schema, std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) schema("$", "top level must be an object");
  static const char* known[] = {"version", "w", "samples", "observable", "h", "distortion", "generative", "algorithm", "iid"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      schema("$", "unknown field '" + it.key() + "'");
    }
  }
  const json& ver = field(root, "version", "$");
  if (!ver.is_number_integer() || ver.get<long long>() != 1) schema("version", "must be the integer 1");

  const json& jw = field(root, "w", "$");
  Labels wl = labels(field(jw, "labels", "w"), "w.labels");
  auto wp = vec(field(jw, "p", "w"), "w.p");
  Distribution pw = at_path("w.p", [&] { return Distribution(wl, wp); });

  const json& js = field(root, "samples", "$");
  Labels sl = labels(field(js, "labels", "samples"), "samples.labels");
  std::optional<double> b;
  if (js.contains("b_bits")) b = number(js["b_bits"], "samples.b_bits");

  Labels hl = labels(field(field(root, "h", "$"), "labels", "h"), "h.labels");

  const json& jo = field(root, "observable", "$");
  if (!jo.is_object()) schema("observable", "expected an object keyed by world label");
  std::vector<std::vector<bool>> observable(wl.size(), std::vector<bool>(sl.size(), false));
  for (auto it = jo.begin(); it != jo.end(); ++it) {
    const std::string path = "observable." + it.key();
    const std::size_t w = index_in(wl, it.key(), "observable");
    for (const auto& s : labels(it.value(), path)) observable[w][index_in(sl, s, path)] = true;
  }

  LearningProblem p;
  const bool has_d = root.contains("distortion"), has_g = root.contains("generative");
  if (has_d == has_g) schema("$", "exactly one of 'distortion' and 'generative' is required");
  if (has_g) {
    if (root.contains("iid")) schema("iid", "not allowed alongside 'generative' (the sample law is derived)");
    const json& g = root["generative"];
    Labels xl = labels(field(g, "x", "generative"), "generative.x");
    Labels yl = labels(field(g, "y", "generative"), "generative.y");
    GenerativeSpec spec;
    spec.p_x_given_w = read_kernel(field(g, "p_x_given_w", "generative"), wl, xl, "generative.p_x_given_w");
    spec.p_y_given_x = read_kernel(field(g, "p_y_given_x", "generative"), xl, yl, "generative.p_y_given_x");
    const json& hyp = field(g, "hypotheses", "generative");
    for (const auto& h : hl) {
      spec.hypotheses.push_back(read_kernel(field(hyp, h, "generative.hypotheses"), xl, yl, "generative.hypotheses." + h));
    }
    if (hyp.size() != hl.size()) schema("generative.hypotheses", "one entry per hypothesis label");
    const json& mode = field(g, "mode", "generative");
    if (mode == "kl") {
      spec.mode = DistortionMode::kl;
      if (g.contains("loss")) schema("generative.loss", "only allowed in loss mode");
    } else if (mode == "loss") {
      spec.mode = DistortionMode::loss;
      spec.loss = matrix(field(g, "loss", "generative"), yl.size(), yl.size(), "generative.loss");
    } else {
      schema("generative.mode", "must be \"kl\" or \"loss\"");
    }
    p = at_path("generative", [&] { return build_from_generative(pw, spec, hl); });
    if (p.samples != sl) schema("samples.labels", "must list x:y pairs in x-major order for the generative block");
    if (p.observable != observable) schema("observable", "does not match the support of the generative block");
  } else {
    p.w = pw;
    p.samples = sl;
    p.h = hl;
    p.observable = observable;
    p.distortion = matrix(root["distortion"], wl.size(), hl.size(), "distortion");
    if (root.contains("iid")) {
      p.iid = read_kernel(field(root["iid"], "p", "iid"), wl, sl, "iid.p");
    }
  }
  if (b) {
    p.b_bits = *b;
    p.b_explicit = true;
  } else {
    p.b_bits = std::log2(static_cast<double>(sl.size()));
  }
  p.validate();

  const json& ja = field(root, "algorithm", "$");
  if (!ja.is_object() || ja.empty()) schema("algorithm", "expected a non-empty object");
  Algorithm alg;
  if (ja.contains("deterministic")) {
    if (ja.size() != 1) schema("algorithm", "'deterministic' cannot be mixed with kernel tables");
    const json& jd = ja["deterministic"];
    DeterministicMap det;
    auto sp = vec(field(jd, "seed_p", "algorithm.deterministic"), "algorithm.deterministic.seed_p");
    Labels seed_labels;
    for (std::size_t i = 0; i < sp.size(); ++i) seed_labels.push_back("r" + std::to_string(i));
    det.seed = at_path("algorithm.deterministic.seed_p", [&] { return Distribution(seed_labels, sp); });
    const json& len = field(jd, "seed_len", "algorithm.deterministic");
    if (!len.is_number_unsigned() || len.get<std::size_t>() == 0) {
      schema("algorithm.deterministic.seed_len", "must be a positive integer");
    }
    det.seed_len = len.get<std::size_t>();
    const std::size_t R = at_path("algorithm.deterministic", [&] { return det.seed_vectors(); });
    const json& maps = field(jd, "map", "algorithm.deterministic");
    if (!maps.is_object()) schema("algorithm.deterministic.map", "expected an object keyed by dataset size");
    for (auto it = maps.begin(); it != maps.end(); ++it) {
      const std::string path = "algorithm.deterministic.map." + it.key();
      const std::size_t n = parse_size(it.key(), path);
      if (!it.value().is_array()) schema(path, "expected an array of rows");
      std::vector<std::size_t> table;
      for (std::size_t t = 0; t < it.value().size(); ++t) {
        const std::string rp = path + "[" + std::to_string(t) + "]";
        Labels row = labels(it.value()[t], rp);
        if (row.size() != R) schema(rp, "expected " + std::to_string(R) + " entries (one per seed vector)");
        for (const auto& h : row) table.push_back(index_in(hl, h, rp));
      }
      det.map.emplace(n, std::move(table));
    }
    alg = at_path("algorithm.deterministic", [&] { return Algorithm(p, std::move(det)); });
  } else {
    std::map<std::size_t, Kernel> ks;
    for (auto it = ja.begin(); it != ja.end(); ++it) {
      const std::string path = "algorithm." + it.key();
      const std::size_t n = parse_size(it.key(), path);
      DatasetUniverse u = at_path(path, [&] { return DatasetUniverse(p, n); });
      ks.emplace(n, read_kernel(it.value(), u.labels(), hl, path));
    }
    alg = Algorithm(std::move(ks));
  }
  validate_algorithm(p, alg);
  return Scenario{std::move(p), std::move(alg)};
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void write_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << save_scenario(s);
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace lossylearn
