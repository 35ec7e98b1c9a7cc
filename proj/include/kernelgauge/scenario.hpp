#pragma once

// Scenario files: JSON with the weight family, the jet order and a run
// section. Unknown keys are rejected; every diagnostic carries the line of
// the offending key.
//
//   {
//     "domain": {"kind": "annulus", "q": 0.25},
//     "point":  {"z0": [0.5, 0.0]},
//     "weight": {"p0": 1, "aG": 0, "epsilon": 0,
//                "u": {"log": -0.5, "laurent": [[1, 0.2, 0.0]]},
//                "c": {"kind": "exp_delta", "delta": 0.3}},
//     "k": 0,
//     "run": {...}
//   }

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kernelgauge/errors.hpp"
#include "kernelgauge/gfunctional.hpp"
#include "kernelgauge/verifier.hpp"
#include "kernelgauge/weights.hpp"

namespace kernelgauge {

using json = nlohmann::json;

struct RunSettings {
  VerifySettings verify;
  int curve_points = 64;
  std::string output_dir = ".";
};

struct Scenario {
  WeightConfig config;
  RunSettings run;
  std::string source;
};

namespace detail {

/// Records the line of every key, in document order, keyed by dotted path.
class KeyLines : public nlohmann::json_sax<json> {
 public:
  explicit KeyLines(const std::string& text) {
    // key tokens are strings followed by ':'; the n-th one is the n-th key event
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char ch = text[i];
      if (ch == '\n') ++line;
      if (ch != '"') continue;
      const int start = line;
      std::size_t j = i + 1;
      for (; j < text.size() && text[j] != '"'; ++j) {
        if (text[j] == '\\') ++j;
        else if (text[j] == '\n') ++line;
      }
      std::size_t k = j + 1;
      while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) {
        if (text[k] == '\n') ++line;
        ++k;
      }
      if (k < text.size() && text[k] == ':') token_lines_.push_back(start);
      i = k - 1;
    }
  }

  int line_of(const std::string& path) const {
    const auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

  bool null() override { return done_value(); }
  bool boolean(bool) override { return done_value(); }
  bool number_integer(number_integer_t) override { return done_value(); }
  bool number_unsigned(number_unsigned_t) override { return done_value(); }
  bool number_float(number_float_t, const string_t&) override { return done_value(); }
  bool string(string_t&) override { return done_value(); }
  bool binary(binary_t&) override { return done_value(); }
  bool start_object(std::size_t) override {
    stack_.push_back({false, 0, path_for_child()});
    return true;
  }
  bool end_object() override {
    stack_.pop_back();
    return done_value();
  }
  bool start_array(std::size_t) override {
    stack_.push_back({true, 0, path_for_child()});
    return true;
  }
  bool end_array() override {
    stack_.pop_back();
    return done_value();
  }
  bool key(string_t& k) override {
    Frame& f = stack_.back();
    f.key = k;
    const std::string path = f.prefix.empty() ? k : f.prefix + "." + k;
    if (next_token_ < token_lines_.size()) lines_.emplace(path, token_lines_[next_token_]);
    ++next_token_;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    bool array;
    int index;
    std::string prefix;
    std::string key;
  };

  std::string path_for_child() const {
    if (stack_.empty()) return "";
    const Frame& f = stack_.back();
    if (f.array) return f.prefix + "[" + std::to_string(f.index) + "]";
    return f.prefix.empty() ? f.key : f.prefix + "." + f.key;
  }

  bool done_value() {
    if (!stack_.empty() && stack_.back().array) ++stack_.back().index;
    return true;
  }

  std::vector<int> token_lines_;
  std::size_t next_token_ = 0;
  std::vector<Frame> stack_;
  std::map<std::string, int> lines_;
};

class ScenarioReader {
 public:
  ScenarioReader(std::string source, const KeyLines& lines) : source_(std::move(source)), lines_(lines) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = source_;
    std::string p = path;
    int line = 0;
    while (!p.empty() && (line = lines_.line_of(p)) == 0) {
      const auto cut = p.find_last_of(".[");
      p = cut == std::string::npos ? "" : p.substr(0, cut);
    }
    if (line > 0) where += ":" + std::to_string(line);
    throw InvalidConfig(where + ": " + (path.empty() ? "" : path + ": ") + msg);
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (const char* a : keys) ok = ok || k == a;
      if (!ok) fail(join(path, k), "unknown key '" + join(path, k) + "'");
    }
  }

  double number(const json& obj, const std::string& path, const char* key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    return number(obj.at(key), join(path, key));
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  int integer(const json& obj, const std::string& path, const char* key, int fallback, int lo, int hi) const {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      fail(join(path, key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  cplx complex(const json& v, const std::string& path) const {
    if (v.is_number()) return number(v, path);
    if (v.is_array() && v.size() == 2) return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
    fail(path, "expected a number or [re, im]");
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  std::string source_;
  const KeyLines& lines_;
};

inline HarmonicFunctionRep read_u(const ScenarioReader& r, const json& u) {
  r.allow(u, "weight.u", {"log", "laurent"});
  const double alpha = r.number(u, "weight.u", "log", 0.0);
  std::vector<std::pair<int, cplx>> terms;
  if (u.contains("laurent")) {
    const json& list = u.at("laurent");
    if (!list.is_array()) r.fail("weight.u.laurent", "expected a list of [n, re] or [n, re, im]");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = "weight.u.laurent[" + std::to_string(i) + "]";
      const json& t = list[i];
      if (!t.is_array() || t.size() < 2 || t.size() > 3 || !t[0].is_number_integer()) {
        r.fail(p, "expected [n, re] or [n, re, im]");
      }
      const long long n = t[0].get<long long>();
      if (n < -64 || n > 64) r.fail(p, "index must lie in [-64, 64]");
      const double im = t.size() == 3 ? r.number(t[2], p) : 0.0;
      terms.emplace_back(static_cast<int>(n), cplx(r.number(t[1], p), im));
    }
  }
  return HarmonicFunctionRep::from_terms(alpha, terms);
}

inline CProfile read_profile(const ScenarioReader& r, const json& c) {
  if (!c.is_object() || !c.contains("kind") || !c.at("kind").is_string()) {
    r.fail("weight.c", "expected an object with a string 'kind'");
  }
  const std::string kind = c.at("kind").get<std::string>();
  try {
    if (kind == "one") {
      r.allow(c, "weight.c", {"kind"});
      return CProfile::constant_one();
    }
    if (kind == "exp_delta") {
      r.allow(c, "weight.c", {"kind", "delta"});
      if (!c.contains("delta")) r.fail("weight.c", "exp_delta needs 'delta'");
      return CProfile::exp_delta(r.number(c.at("delta"), "weight.c.delta"));
    }
    if (kind == "poly") {
      r.allow(c, "weight.c", {"kind", "m"});
      if (!c.contains("m")) r.fail("weight.c", "poly needs 'm'");
      return CProfile::poly(r.number(c.at("m"), "weight.c.m"));
    }
  } catch (const InvalidProfile& e) {
    r.fail("weight.c", std::string(e.what()).substr(std::string("InvalidProfile: ").size()));
  }
  r.fail("weight.c.kind", "unknown profile '" + kind + "' (one, exp_delta, poly)");
}

inline void read_area(const ScenarioReader& r, const json& a, AreaResolution& res) {
  r.allow(a, "run.area", {"radial_cells", "angular_cells", "gauss_points", "patch_rings", "patch_angular", "grading"});
  res.radial_cells = r.integer(a, "run.area", "radial_cells", res.radial_cells, 1, 256);
  res.angular_cells = r.integer(a, "run.area", "angular_cells", res.angular_cells, 8, 4096);
  res.gauss_points = r.integer(a, "run.area", "gauss_points", res.gauss_points, 2, 32);
  res.patch_rings = r.integer(a, "run.area", "patch_rings", res.patch_rings, 1, 128);
  res.patch_angular = r.integer(a, "run.area", "patch_angular", res.patch_angular, 8, 4096);
  res.grading = r.number(a, "run.area", "grading", res.grading);
  if (!(res.grading > 0.0 && res.grading < 1.0)) r.fail("run.area.grading", "must lie in (0, 1)");
}

inline void read_run(const ScenarioReader& r, const json& run, RunSettings& s) {
  r.allow(run, "run", {"schedule", "boundary_nodes", "area", "tol_eq", "curve_points", "output_dir"});
  KernelSettings& ks = s.verify.kernel;
  if (run.contains("schedule")) {
    const json& sch = run.at("schedule");
    if (!sch.is_array() || sch.empty()) r.fail("run.schedule", "expected a non-empty list of truncations");
    ks.schedule.clear();
    for (std::size_t i = 0; i < sch.size(); ++i) {
      const std::string p = "run.schedule[" + std::to_string(i) + "]";
      if (!sch[i].is_number_integer() || sch[i].get<long long>() < 1 || sch[i].get<long long>() > 96) {
        r.fail(p, "expected an integer in [1, 96]");
      }
      const int n = sch[i].get<int>();
      if (!ks.schedule.empty() && n <= ks.schedule.back()) r.fail(p, "schedule must increase");
      ks.schedule.push_back(n);
    }
  }
  ks.boundary_nodes = r.integer(run, "run", "boundary_nodes", ks.boundary_nodes, 16, 16384);
  if (run.contains("area")) read_area(r, run.at("area"), ks.area);
  s.verify.tol_eq = r.number(run, "run", "tol_eq", s.verify.tol_eq);
  if (!(s.verify.tol_eq > 0.0)) r.fail("run.tol_eq", "must be positive");
  s.curve_points = r.integer(run, "run", "curve_points", s.curve_points, 2, 100000);
  if (run.contains("output_dir")) {
    if (!run.at("output_dir").is_string()) r.fail("run.output_dir", "expected a string");
    s.output_dir = run.at("output_dir").get<std::string>();
  }
}

}  // namespace detail

/// Parses scenario text. Errors are InvalidConfig with "source:line: path: msg".
inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based; count lines up to it
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InvalidConfig(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  detail::KeyLines lines(text);
  json::sax_parse(text, &lines);
  const detail::ScenarioReader r(source, lines);

  Scenario sc;
  sc.source = source;
  r.allow(doc, "", {"domain", "point", "weight", "k", "run"});
  for (const char* key : {"domain", "point", "weight"}) {
    if (!doc.contains(key)) r.fail("", std::string("missing section '") + key + "'");
  }
  WeightConfig& c = sc.config;

  const json& dom = doc.at("domain");
  r.allow(dom, "domain", {"kind", "q"});
  if (!dom.contains("kind") || !dom.at("kind").is_string()) r.fail("domain", "expected 'kind': disc or annulus");
  const std::string kind = dom.at("kind").get<std::string>();
  if (kind == "disc") {
    if (dom.contains("q")) r.fail("domain.q", "q applies to the annulus only");
    c.domain = DomainSpec::disc();
  } else if (kind == "annulus") {
    if (!dom.contains("q")) r.fail("domain", "annulus needs 'q'");
    const double q = r.number(dom.at("q"), "domain.q");
    if (!(q > 0.0 && q < 1.0)) r.fail("domain.q", "must lie in (0, 1)");
    c.domain = DomainSpec::annulus(q);
  } else {
    r.fail("domain.kind", "unknown domain '" + kind + "' (disc, annulus)");
  }

  const json& pt = doc.at("point");
  r.allow(pt, "point", {"z0"});
  if (!pt.contains("z0")) r.fail("point", "missing 'z0'");
  c.z0 = r.complex(pt.at("z0"), "point.z0");
  if (!c.domain.contains(c.z0)) r.fail("point.z0", "must lie inside the domain");

  const json& w = doc.at("weight");
  r.allow(w, "weight", {"p0", "aG", "epsilon", "u", "c"});
  c.psi.p0 = r.number(w, "weight", "p0", 1.0);
  if (!(c.psi.p0 > 0.0)) r.fail("weight.p0", "must be positive");
  c.psi.epsilon = r.number(w, "weight", "epsilon", 0.0);
  if (c.psi.epsilon < 0.0) r.fail("weight.epsilon", "must be nonnegative");
  c.phi.a_green = r.number(w, "weight", "aG", 0.0);
  if (w.contains("u")) c.phi.u = detail::read_u(r, w.at("u"));
  if (c.domain.is_disc()) {
    bool singular = c.phi.u.log_coefficient() != 0.0;
    for (int n = 1; n <= c.phi.u.truncation(); ++n) singular = singular || c.phi.u.coefficient(-n) != cplx{};
    if (singular) r.fail("weight.u", "log and negative Laurent terms are singular at 0 on the disc");
  }
  if (w.contains("c")) c.profile = detail::read_profile(r, w.at("c"));

  c.k = r.integer(doc, "", "k", 0, 0, 8);
  if (doc.contains("run")) detail::read_run(r, doc.at("run"), sc.run);
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace kernelgauge
