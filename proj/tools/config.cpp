#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "bchain/io.hpp"

namespace bchain::cli {

namespace {

using nlohmann::json;

enum class Kind { integer, number, boolean, string, choice, number_or_array, numbers, integers, choices, object };

struct Schema;

struct Field {
  std::string name;
  Kind kind;
  bool required = false;
  json fallback = nullptr;  // filled in when absent
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;     // lo excluded
  std::vector<std::string> allowed;
  const Schema* sub = nullptr;
};

struct Schema {
  std::vector<Field> fields;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

Field req(std::string n, Kind k) { return Field{std::move(n), k, true}; }
Field opt(std::string n, Kind k, json d = nullptr) { return Field{std::move(n), k, false, std::move(d)}; }
Field ranged(Field f, double lo, double hi = kInf, bool lo_open = false) {
  f.lo = lo;
  f.hi = hi;
  f.lo_open = lo_open;
  return f;
}
Field pick(Field f, std::vector<std::string> allowed) {
  f.allowed = std::move(allowed);
  return f;
}
Field nested(Field f, const Schema& s) {
  f.sub = &s;
  return f;
}

const Schema kChain{{
    ranged(req("n_sites", Kind::integer), 1),
    ranged(req("total_bosons", Kind::integer), 0),
    pick(opt("hopping", Kind::choice, "PTH"), {"PTH", "CH"}),
    ranged(opt("lambda", Kind::number, 2.0), 0, kInf, true),
    opt("J", Kind::numbers),
    opt("U", Kind::number_or_array, 0.0),
    opt("U_ends", Kind::number),
    opt("mu", Kind::number_or_array, 0.0),
    opt("spec_csv", Kind::string),
    ranged(opt("chi_max", Kind::integer, 0), 0),
    ranged(opt("trunc_rel", Kind::number, 1e-14), 0, 1, true),
}};

const Schema kAfter{{
    pick(opt("hopping", Kind::choice), {"PTH", "CH"}),
    ranged(opt("lambda", Kind::number), 0, kInf, true),
    opt("J", Kind::numbers),
    opt("U", Kind::number_or_array),
    opt("U_ends", Kind::number),
    opt("mu", Kind::number_or_array),
}};

const Schema kGround{{
    ranged(opt("dtau", Kind::number_or_array, 1e-3), 0, kInf, true),
    ranged(opt("tol", Kind::number, 1e-14), 0),
    ranged(opt("max_steps", Kind::integer, 1000000), 1),
    ranged(opt("check_every", Kind::integer, 10), 1),
    ranged(opt("guard_sweeps", Kind::integer, 100), 1),
}};

const Schema kInitial{{
    pick(opt("state", Kind::choice, "unit_filling"), {"unit_filling", "fock"}),
    ranged(opt("occupations", Kind::integers), 0),
}};

const Schema kReal{{
    ranged(opt("dt", Kind::number, 1e-3), 0, kInf, true),
    ranged(opt("steps", Kind::integer, 0), 0),
    ranged(opt("chi_cap", Kind::integer, 0), 0),
    ranged(opt("record_every", Kind::integer, 1), 1),
    pick(opt("observables", Kind::choices, json::array({"density"})), {"density", "fluctuation", "entropy", "eee"}),
    ranged(opt("eee_budget_bytes", Kind::integer, 2147483648LL), 1),
}};

const Schema kPerturbation{{
    req("n0", Kind::number),
    req("eps", Kind::number),
}};

const Schema kCollision{{
    ranged(req("n_sites", Kind::integer), 2),
    ranged(req("total_bosons", Kind::integer), 0),
    ranged(opt("lambda", Kind::number, 1.0), 0, kInf, true),
    ranged(req("mu_over_n", Kind::numbers), -kInf),
    opt("with_eee", Kind::boolean, true),
    ranged(opt("chi_max", Kind::integer, 0), 0),
}};

const Schema kGp{{
    ranged(req("g", Kind::number), 0),
    req("k", Kind::number),
    ranged(opt("beta", Kind::number, 1.96), 0, kInf, true),
    ranged(opt("eps", Kind::number, 0.04), 0, kInf, true),
    ranged(opt("pairs", Kind::integer, 40), 0),
    ranged(opt("grid_size", Kind::integer, 128), 2),
    ranged(opt("dt_max", Kind::number, 1e-3), 0, kInf, true),
    opt("modes", Kind::integers, json::array({-2, -1, 1, 2})),
    pick(opt("model", Kind::choice, "effective"), {"effective", "raw"}),
    opt("bdg", Kind::boolean, true),
    opt("analytic", Kind::boolean, true),
}};

const Schema kScan{{
    req("k", Kind::number),
    ranged(opt("beta", Kind::number, 1.96), 0, kInf, true),
    ranged(opt("eps", Kind::number, 0.04), 0, kInf, true),
    ranged(opt("pairs", Kind::integer, 50), 0),
    ranged(opt("grid_size", Kind::integer, 128), 2),
    ranged(opt("dt_max", Kind::number, 1e-3), 0, kInf, true),
    opt("modes", Kind::integers, json::array({-2, -1, 1, 2})),
    pick(opt("model", Kind::choice, "effective"), {"effective", "raw"}),
    ranged(opt("g_values", Kind::numbers), 0),
    ranged(opt("g_lo", Kind::number), 0),
    ranged(opt("g_hi", Kind::number), 0),
    ranged(opt("g_step", Kind::number), 0, kInf, true),
    ranged(opt("resonance_j_max", Kind::integer, 6), 1),
}};

const Schema kUnits{{
    pick(opt("energy", Kind::choice, "E_R"), {"E_R"}),
    pick(opt("time", Kind::choice, "hbar_over_E_R"), {"hbar_over_E_R"}),
}};

std::vector<Field> common_fields() {
  return {
      pick(req("experiment", Kind::choice), experiment_names()),
      opt("description", Kind::string),
      opt("output_dir", Kind::string),
      ranged(opt("threads", Kind::integer), 1),
      nested(opt("units", Kind::object, json::object()), kUnits),
  };
}

Schema top_level(const std::string& experiment) {
  Schema s{common_fields()};
  auto add = [&](Field f) { s.fields.push_back(std::move(f)); };
  auto chain_run = [&](bool prepare) {
    add(nested(req("chain", Kind::object), kChain));
    add(nested(opt("initial", Kind::object, json::object()), kInitial));
    if (prepare) {
      add(opt("prepare", Kind::boolean, true));
      add(nested(opt("ground", Kind::object, json::object()), kGround));
    }
    add(nested(opt("real", Kind::object, json::object()), kReal));
  };
  if (experiment == "ground-state") {
    add(nested(req("chain", Kind::object), kChain));
    add(nested(opt("initial", Kind::object, json::object()), kInitial));
    add(nested(opt("ground", Kind::object, json::object()), kGround));
    add(ranged(opt("checkpoint_every", Kind::integer, 10), 0));
  } else if (experiment == "quench") {
    chain_run(true);
    add(nested(req("after", Kind::object), kAfter));
  } else if (experiment == "real-time") {
    chain_run(false);
  } else if (experiment == "perturbed-evolution") {
    chain_run(true);
    add(nested(req("perturbation", Kind::object), kPerturbation));
  } else if (experiment == "collision") {
    add(nested(req("collision", Kind::object), kCollision));
  } else if (experiment == "kicked-gp") {
    add(nested(req("gp", Kind::object), kGp));
  } else if (experiment == "stability-scan") {
    add(nested(req("scan", Kind::object), kScan));
  }
  return s;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::integer: return "an integer";
    case Kind::number: return "a number";
    case Kind::boolean: return "a boolean";
    case Kind::string: return "a string";
    case Kind::choice: return "a string";
    case Kind::number_or_array: return "a number or an array of numbers";
    case Kind::numbers: return "an array of numbers";
    case Kind::integers: return "an array of integers";
    case Kind::choices: return "an array of strings";
    case Kind::object: return "an object";
  }
  return "?";
}

class Checker {
 public:
  explicit Checker(const std::string& text) : text_(text) {}

  void object(json& node, const Schema& schema, const std::string& path, std::size_t from) {
    std::map<std::string, const Field*> known;
    for (const auto& f : schema.fields) known[f.name] = &f;
    for (auto it = node.begin(); it != node.end(); ++it)
      if (!known.count(it.key())) fail(path, it.key(), "unknown key \"" + it.key() + "\"", from);
    for (const auto& f : schema.fields) {
      auto it = node.find(f.name);
      if (it == node.end()) {
        if (f.required) {
          errors_.push_back("missing required field \"" + f.name + "\" at " + (path.empty() ? "/" : path));
          continue;
        }
        if (f.fallback.is_null()) continue;
        node[f.name] = f.fallback;
        // scalar defaults are trusted; nested objects still get theirs filled in
        if (f.kind != Kind::object) continue;
        it = node.find(f.name);
      }
      value(*it, f, path + "/" + f.name, locate(f.name, from));
    }
  }

  std::vector<std::string> errors_;

 private:
  std::size_t locate(const std::string& key, std::size_t from) const {
    const auto p = text_.find("\"" + key + "\"", from);
    return p == std::string::npos ? from : p;
  }

  std::string line_of(std::size_t pos) const {
    if (pos == 0 || pos >= text_.size()) return "";
    return " (line " + std::to_string(1 + std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n')) +
           ")";
  }

  void fail(const std::string& path, const std::string& key, const std::string& what, std::size_t from) {
    errors_.push_back(what + " at " + (path.empty() ? "/" : path) + line_of(locate(key, from)));
  }

  void bad(const std::string& path, const std::string& what, std::size_t pos) {
    errors_.push_back(path + ": " + what + line_of(pos));
  }

  void range(const std::string& path, const Field& f, double v, std::size_t pos) {
    const bool low = f.lo_open ? !(v > f.lo) : !(v >= f.lo);
    if (low || !(v <= f.hi) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "range error: value " << v << " outside " << (f.lo_open ? "(" : "[") << f.lo << ", " << f.hi
         << (std::isinf(f.hi) ? ")" : "]");
      bad(path, os.str(), pos);
    }
  }

  void choice(const std::string& path, const Field& f, const json& v, std::size_t pos) {
    if (!v.is_string()) return bad(path, std::string("must be ") + kind_name(f.kind), pos);
    for (const auto& a : f.allowed)
      if (a == v.get<std::string>()) return;
    std::string list;
    for (const auto& a : f.allowed) list += (list.empty() ? "" : ", ") + a;
    bad(path, "\"" + v.get<std::string>() + "\" is not one of {" + list + "}", pos);
  }

  void value(json& v, const Field& f, const std::string& path, std::size_t pos) {
    const std::string want = std::string("must be ") + kind_name(f.kind);
    switch (f.kind) {
      case Kind::integer:
        if (!v.is_number_integer()) return bad(path, want, pos);
        return range(path, f, v.get<double>(), pos);
      case Kind::number:
        if (!v.is_number()) return bad(path, want, pos);
        return range(path, f, v.get<double>(), pos);
      case Kind::boolean:
        if (!v.is_boolean()) return bad(path, want, pos);
        return;
      case Kind::string:
        if (!v.is_string()) return bad(path, want, pos);
        return;
      case Kind::choice:
        return choice(path, f, v, pos);
      case Kind::number_or_array:
        if (v.is_number()) return range(path, f, v.get<double>(), pos);
        [[fallthrough]];
      case Kind::numbers:
        if (!v.is_array() || v.empty()) return bad(path, want + " (non-empty)", pos);
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!v[i].is_number()) return bad(path + "/" + std::to_string(i), "must be a number", pos);
          range(path + "/" + std::to_string(i), f, v[i].get<double>(), pos);
        }
        return;
      case Kind::integers:
        if (!v.is_array() || v.empty()) return bad(path, want + " (non-empty)", pos);
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (!v[i].is_number_integer()) return bad(path + "/" + std::to_string(i), "must be an integer", pos);
          range(path + "/" + std::to_string(i), f, v[i].get<double>(), pos);
        }
        return;
      case Kind::choices:
        if (!v.is_array()) return bad(path, want, pos);
        for (std::size_t i = 0; i < v.size(); ++i) choice(path + "/" + std::to_string(i), f, v[i], pos);
        return;
      case Kind::object:
        if (!v.is_object()) return bad(path, want, pos);
        return object(v, *f.sub, path, pos);
    }
  }

  const std::string& text_;
};

// Cross-field rules the per-field schema cannot express.
void semantic(const json& doc, std::vector<std::string>& errors) {
  auto chain_arrays = [&](const json& c, const std::string& at, int n) {
    if (c.contains("J") && static_cast<int>(c["J"].size()) != n - 1)
      errors.push_back(at + "/J: expected " + std::to_string(n - 1) + " values (n_sites - 1)");
    for (const char* key : {"U", "mu"})
      if (c.contains(key) && c[key].is_array() && static_cast<int>(c[key].size()) != n)
        errors.push_back(at + "/" + key + ": expected " + std::to_string(n) + " values (n_sites)");
  };
  if (doc.contains("chain") && doc["chain"].is_object() && doc["chain"].contains("n_sites") &&
      doc["chain"]["n_sites"].is_number_integer()) {
    const int n = doc["chain"]["n_sites"].get<int>();
    chain_arrays(doc["chain"], "/chain", n);
    if (doc.contains("after") && doc["after"].is_object()) chain_arrays(doc["after"], "/after", n);
    if (doc.contains("initial") && doc["initial"].is_object()) {
      const json& in = doc["initial"];
      const bool fock = in.value("state", "unit_filling") == "fock";
      if (fock && !in.contains("occupations"))
        errors.push_back("/initial/occupations: required when state is \"fock\"");
      if (in.contains("occupations") && in["occupations"].is_array()) {
        if (!fock) errors.push_back("/initial/occupations: only allowed when state is \"fock\"");
        long sum = 0;
        for (const auto& x : in["occupations"])
          if (x.is_number_integer()) sum += x.get<long>();
        if (static_cast<int>(in["occupations"].size()) != n)
          errors.push_back("/initial/occupations: expected " + std::to_string(n) + " values (n_sites)");
        if (doc["chain"].contains("total_bosons") && doc["chain"]["total_bosons"].is_number_integer() &&
            sum != doc["chain"]["total_bosons"].get<long>())
          errors.push_back("/initial/occupations: sum differs from total_bosons");
      }
    }
  }
  if (doc.contains("ground") && doc["ground"].is_object() && doc["ground"].contains("dtau") &&
      doc["ground"]["dtau"].is_array() && doc["ground"]["dtau"].empty())
    errors.push_back("/ground/dtau: empty ladder");
  if (doc.contains("scan") && doc["scan"].is_object()) {
    const json& s = doc["scan"];
    const bool values = s.contains("g_values");
    const bool grid = s.contains("g_lo") || s.contains("g_hi") || s.contains("g_step");
    if (values == grid) errors.push_back("/scan: give either g_values or all of g_lo, g_hi, g_step");
    if (grid && !(s.contains("g_lo") && s.contains("g_hi") && s.contains("g_step")))
      errors.push_back("/scan: g_lo, g_hi and g_step go together");
    if (grid && s.contains("g_lo") && s.contains("g_hi") && s["g_lo"].is_number() && s["g_hi"].is_number() &&
        s["g_hi"].get<double>() < s["g_lo"].get<double>())
      errors.push_back("/scan/g_hi: range error: below g_lo");
  }
  for (const char* sec : {"gp", "scan"}) {
    if (!doc.contains(sec) || !doc[sec].is_object()) continue;
    const json& s = doc[sec];
    if (s.contains("grid_size") && s["grid_size"].is_number_integer()) {
      const long l = s["grid_size"].get<long>();
      if (l < 2 || (l & (l - 1)) != 0)
        errors.push_back(std::string("/") + sec + "/grid_size: must be a power of two");
    }
    if (s.contains("beta") && s.contains("eps") && s["beta"].is_number() && s["eps"].is_number() &&
        !(s["beta"].get<double>() > s["eps"].get<double>()))
      errors.push_back(std::string("/") + sec + "/beta: range error: must exceed eps");
    if (s.contains("modes") && s["modes"].is_array())
      for (const auto& j : s["modes"])
        if (j.is_number_integer() && j.get<int>() == 0)
          errors.push_back(std::string("/") + sec + "/modes: j = 0 is the condensate, not a mode");
  }
}

std::vector<std::string> check(json& doc, const std::string& text) {
  if (!doc.is_object()) return {"/: top level must be an object"};
  if (!doc.contains("experiment")) return {"missing required field \"experiment\" at /"};
  Checker c(text);
  const json& e = doc["experiment"];
  const bool known_name = e.is_string() && std::count(experiment_names().begin(), experiment_names().end(),
                                                      e.get<std::string>()) == 1;
  c.object(doc, top_level(known_name ? e.get<std::string>() : ""), "", 0);
  if (c.errors_.empty()) semantic(doc, c.errors_);
  return c.errors_;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos > 0 ? pos - 1 : 0), '\n');
    throw ConfigError("JSON syntax error at line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"ground-state", "quench",    "real-time",     "collision",
                                              "perturbed-evolution", "kicked-gp", "stability-scan"};
  return names;
}

std::vector<std::string> validate_text(const std::string& text) {
  json doc;
  try {
    doc = parse_json(text);
  } catch (const ConfigError& e) {
    return {e.what()};
  }
  return check(doc, text);
}

ExperimentConfig parse_config(const std::string& text) {
  json doc = parse_json(text);
  const auto errors = check(doc, text);
  if (!errors.empty()) {
    std::string all;
    for (const auto& e : errors) all += (all.empty() ? "" : "\n") + e;
    throw ConfigError(all);
  }
  ExperimentConfig cfg;
  cfg.experiment = doc["experiment"].get<std::string>();
  cfg.body = std::move(doc);
  cfg.source_sha256 = io::sha256_hex(text);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace bchain::cli
