#include "heatsg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatsg/semigroup.hpp"
#include "heatsg/verify.hpp"
#include "heatsg/weights.hpp"

namespace heatsg::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr const char* kTool = "heatsg";

std::string in_quotes(std::string_view s) { return "'" + std::string(s) + "'"; }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument("not a finite number: " + in_quotes(text));
  }
  return v;
}

long parse_integer(std::string_view text) {
  long v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw std::invalid_argument("not an integer: " + in_quotes(text));
  }
  return v;
}

std::vector<int> parse_indices(std::string_view text) {
  std::vector<int> k;
  for (auto part : split(text, ',')) {
    k.push_back(static_cast<int>(parse_integer(part)));
  }
  return k;
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string seventeen(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Options

enum class ValueType { Text, Number, Integer };

struct OptionSpec {
  const char* name;
  ValueType type;
  const char* fallback;  // nullptr: no default
  const char* help;
};

struct Command {
  const char* name;
  const char* description;
  std::vector<OptionSpec> options;
};

const std::vector<OptionSpec>& common_options() {
  static const std::vector<OptionSpec> specs = {
      {"format", ValueType::Text, "csv", "csv or json"},
      {"seed", ValueType::Integer, "42", "sampler seed"},
      {"rel-tol", ValueType::Number, "1e-9", "quadrature relative tolerance"},
      {"max-evals", ValueType::Integer, "10000000", "quadrature evaluation budget"},
  };
  return specs;
}

const std::vector<Command>& commands() {
  static const OptionSpec kind{"kind", ValueType::Text, nullptr,
                               "classical, hermite, hermite-shifted or ou"};
  static const OptionSpec datum{"datum", ValueType::Text, nullptr,
                                "initial datum, e.g. hermite-fn:0 or box:-1,1"};
  static const OptionSpec x{"x", ValueType::Text, "0", "comma-separated point"};
  static const OptionSpec n{"n", ValueType::Integer, nullptr,
                            "dimension (default: length of --x)"};
  static const std::vector<Command> list = {
      {"eval",
       "evaluate u(x,t) for one kernel and datum",
       {kind, datum, x, n,
        {"t", ValueType::Number, nullptr, "physical time"},
        {"s", ValueType::Number, nullptr, "Meda parameter tanh(t)"}}},
      {"weight",
       "classify a weight against D_p^W",
       {{"family", ValueType::Text, nullptr,
         "gaussian:a, power:a, stretched-exp:c,beta or constant:c, optional ;tilt:d"},
        {"p", ValueType::Number, nullptr, "Lebesgue exponent, p >= 1"},
        {"n", ValueType::Integer, "1", "dimension"},
        {"t0", ValueType::Number, nullptr, "time for the norm (default: witness)"}}},
      {"converge",
       "u(x,t_k) against f(x) along t_k = t0 shrink^k",
       {kind, datum, x, n,
        {"t0", ValueType::Number, "1", "starting time"},
        {"steps", ValueType::Integer, "10", "number of shrink steps"},
        {"shrink", ValueType::Number, "0.25", "factor in (0,1)"},
        {"threshold", ValueType::Number, "1e-3", "final error needed to pass"}}},
      {"maximal",
       "sup of |u(x,t)| over t_j = horizon 2^-j",
       {kind, datum, x, n,
        {"horizon", ValueType::Number, "1", "time horizon R"},
        {"grid", ValueType::Integer, "10", "number of grid times"}}},
      {"verify",
       "run certification checks",
       {{"samples", ValueType::Integer, nullptr, "samples per check (default: per check)"}}},
  };
  return list;
}

std::vector<OptionSpec> all_options(const Command& command) {
  std::vector<OptionSpec> specs = command.options;
  specs.insert(specs.end(), common_options().begin(), common_options().end());
  return specs;
}

Json typed(const OptionSpec& spec, const std::string& text) {
  switch (spec.type) {
    case ValueType::Text:
      return text;
    case ValueType::Number:
      return parse_double(text);
    case ValueType::Integer:
      return parse_integer(text);
  }
  return nullptr;
}

Json typed_from_config(const OptionSpec& spec, const Json& v) {
  if (v.is_string()) return typed(spec, v.get<std::string>());
  if (spec.type == ValueType::Text && v.is_array()) {
    std::string joined;
    for (const auto& e : v) {
      if (!e.is_number()) throw std::invalid_argument("config key " + in_quotes(spec.name) + ": expected numbers");
      if (!joined.empty()) joined += ',';
      joined += shortest(e.get<double>());
    }
    return joined;
  }
  if (v.is_number()) {
    switch (spec.type) {
      case ValueType::Text:
        return v.is_number_integer() ? std::to_string(v.get<long>()) : shortest(v.get<double>());
      case ValueType::Number:
        return v.get<double>();
      case ValueType::Integer:
        if (v.is_number_integer()) return v.get<long>();
        break;
    }
  }
  throw std::invalid_argument("config key " + in_quotes(spec.name) + " has the wrong type");
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + in_quotes(path));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("config file " + in_quotes(path) + ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");
  return doc;
}

struct Bound {
  const Command* command = nullptr;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> raw;
  std::string out_path;
  std::string config_path;
  std::vector<std::string> checks;
};

struct Invocation {
  const Command* command = nullptr;
  Json config = Json::object();  // resolved values keyed by long flag name
  std::vector<std::string> checks;
  std::string out_path;
};

Invocation resolve(const Bound& b) {
  const auto specs = all_options(*b.command);
  Json file = Json::object();
  if (!b.config_path.empty()) {
    file = load_config_file(b.config_path);
    for (const auto& [key, value] : file.items()) {
      const bool known = std::any_of(specs.begin(), specs.end(),
                                     [&](const OptionSpec& s) { return key == s.name; });
      if (!known) throw std::invalid_argument("unknown config key " + in_quotes(key));
    }
  }
  Invocation inv;
  inv.command = b.command;
  inv.checks = b.checks;
  inv.out_path = b.out_path;
  for (const auto& spec : specs) {
    const std::string flag = std::string("--") + spec.name;
    if (b.app->get_option(flag)->count() > 0) {
      inv.config[spec.name] = typed(spec, b.raw.at(spec.name));
    } else if (file.contains(spec.name)) {
      inv.config[spec.name] = typed_from_config(spec, file.at(spec.name));
    } else if (spec.fallback != nullptr) {
      inv.config[spec.name] = typed(spec, spec.fallback);
    }
  }
  const std::string format = inv.config.at("format").get<std::string>();
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("--format must be csv or json, got " + in_quotes(format));
  }
  return inv;
}

bool has(const Json& c, const char* key) { return c.contains(key); }

const Json& require(const Json& c, const char* key) {
  if (!c.contains(key)) throw std::invalid_argument(std::string("missing --") + key);
  return c.at(key);
}

std::string text(const Json& c, const char* key) { return require(c, key).get<std::string>(); }
double number(const Json& c, const char* key) { return require(c, key).get<double>(); }
long integer(const Json& c, const char* key) { return require(c, key).get<long>(); }

QuadratureConfig quadrature_config(const Json& c) {
  QuadratureConfig q;
  q.rel_tol = number(c, "rel-tol");
  q.max_evals = integer(c, "max-evals");
  q.validate();
  return q;
}

Point resolve_point(const Json& c) {
  std::vector<double> coords = parse_list(text(c, "x"));
  if (has(c, "n")) {
    const Dim n(static_cast<int>(integer(c, "n")));
    if (coords.size() == 1 && n.value() > 1) {
      coords.assign(static_cast<std::size_t>(n.value()), coords.front());
    } else if (static_cast<int>(coords.size()) != n.value()) {
      throw std::invalid_argument("--x has " + std::to_string(coords.size()) +
                                  " coordinates but --n is " + std::to_string(n.value()));
    }
  }
  (void)Dim(static_cast<int>(coords.size()));
  return Point(std::span<const double>(coords));
}

Json coords_json(const Point& x) {
  Json a = Json::array();
  for (double v : x.coords()) a.push_back(v);
  return a;
}

Json optional_json(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

// ---------------------------------------------------------------------------
// Reports

struct Report {
  std::vector<std::string> columns;
  std::vector<Json> records;
  Json summary;  // null when the command has none
  int exit_code = kOk;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::string cell_text(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  if (v.is_number()) return seventeen(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  std::string joined;
  for (const auto& e : v) {
    if (!joined.empty()) joined += ' ';
    joined += cell_text(e);
  }
  return joined;
}

std::string shell_word(const std::string& s) {
  const bool plain = !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || std::string_view("_.,:/+-=").find(ch) != std::string_view::npos;
  });
  if (plain) return s;
  std::string q = "'";
  for (char ch : s) {
    if (ch == '\'') {
      q += "'\\''";
    } else {
      q += ch;
    }
  }
  return q + "'";
}

std::string flag_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long>());
  return shortest(v.get<double>());
}

std::string canonical_command(const Invocation& inv) {
  std::string cmd = std::string(kTool) + " " + inv.command->name;
  for (const auto& c : inv.checks) cmd += " " + shell_word(c);
  for (const auto& [key, value] : inv.config.items()) {
    cmd += " --" + key + "=" + shell_word(flag_value(value));
  }
  return cmd;
}

std::string render(const Invocation& inv, const Report& report) {
  const std::string command = canonical_command(inv);
  if (inv.config.at("format") == "json") {
    Json header;
    header["tool"] = kTool;
    header["version"] = HEATSG_VERSION;
    header["command"] = command;
    header["config"] = inv.config;
    header["schema_version"] = kSchemaVersion;
    if (!report.summary.is_null()) header["summary"] = report.summary;
    Json records = Json::array();
    for (const auto& r : report.records) {
      Json rec;
      rec["schema_version"] = kSchemaVersion;
      for (const auto& col : report.columns) rec[col] = r.at(col);
      records.push_back(std::move(rec));
    }
    Json doc;
    doc["header"] = std::move(header);
    doc["records"] = std::move(records);
    return doc.dump(2) + "\n";
  }
  std::string s;
  s += std::string("# tool: ") + kTool + " " + HEATSG_VERSION + "\n";
  s += "# command: " + command + "\n";
  s += "# config: " + inv.config.dump() + "\n";
  s += "# schema_version: " + std::to_string(kSchemaVersion) + "\n";
  if (!report.summary.is_null()) s += "# summary: " + report.summary.dump() + "\n";
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    s += (i ? "," : "") + report.columns[i];
  }
  s += "\n";
  for (const auto& r : report.records) {
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
      if (i) s += ",";
      s += csv_field(cell_text(r.at(report.columns[i])));
    }
    s += "\n";
  }
  return s;
}

void write_atomically(const std::string& path, const std::string& body) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path partial = target;
  partial += ".partial";
  {
    std::ofstream f(partial, std::ios::binary | std::ios::trunc);
    if (!f) throw std::invalid_argument("cannot write " + in_quotes(partial.string()));
    f << body;
    f.close();
    if (!f) {
      fs::remove(partial);
      throw std::runtime_error("write failed for " + in_quotes(partial.string()));
    }
  }
  fs::rename(partial, target);
}

// ---------------------------------------------------------------------------
// Commands

Report cmd_eval(const Json& c) {
  const KernelKind kind = parse_kernel_kind(text(c, "kind"));
  const InitialDatum f = parse_datum(text(c, "datum"));
  const Point x = resolve_point(c);
  if (has(c, "t") == has(c, "s")) throw std::invalid_argument("give exactly one of --t and --s");
  const TimeParam tp = has(c, "t") ? TimeParam::from_t(number(c, "t"))
                                   : TimeParam::from_s(number(c, "s"));
  const ApplyResult r = apply(kind, f, x, tp, quadrature_config(c));

  Report rep;
  rep.columns = {"kind", "datum", "n", "x", "t", "s", "value", "error_estimate",
                 "evals_used", "truncation_radius", "converged", "divergent"};
  Json rec;
  rec["kind"] = std::string(to_string(kind));
  rec["datum"] = f.describe();
  rec["n"] = x.size();
  rec["x"] = coords_json(x);
  rec["t"] = tp.t();
  rec["s"] = tp.s();
  rec["value"] = r.value;
  rec["error_estimate"] = r.error_estimate;
  rec["evals_used"] = r.evals_used;
  rec["truncation_radius"] = r.truncation_radius;
  rec["converged"] = r.converged;
  rec["divergent"] = r.divergent;
  rep.records.push_back(std::move(rec));
  rep.exit_code = r.divergent ? kDivergent : (r.converged ? kOk : kNotConverged);
  return rep;
}

Report cmd_weight(const Json& c) {
  const WeightSpec v = parse_weight(text(c, "family"));
  const LebesgueExponent p(number(c, "p"));
  const Dim n(static_cast<int>(integer(c, "n")));
  const QuadratureConfig q = quadrature_config(c);
  const MembershipVerdict verdict = dpw_classify(v, p, n, q);
  const std::optional<double> t0 = has(c, "t0") ? std::optional(number(c, "t0")) : verdict.witness_t0;
  std::optional<NormResult> norm;
  if (t0) norm = dpw_norm(v, *t0, p, n, q);

  Report rep;
  rep.columns = {"family", "p", "n", "member", "threshold_M", "witness_t0", "norm_t0",
                 "norm", "log_norm", "norm_divergent", "norm_converged", "evidence_rate",
                 "evidence_radius", "evidence_log_integral", "interpretation"};
  Json rec;
  rec["family"] = v.describe();
  rec["p"] = p.p();
  rec["n"] = n.value();
  rec["member"] = verdict.member;
  rec["threshold_M"] = optional_json(verdict.threshold_M);
  rec["witness_t0"] = optional_json(verdict.witness_t0);
  rec["norm_t0"] = optional_json(t0);
  rec["norm"] = norm ? Json(norm->value) : Json(nullptr);
  rec["log_norm"] = norm ? Json(norm->log_value) : Json(nullptr);
  rec["norm_divergent"] = norm ? Json(norm->divergent) : Json(nullptr);
  rec["norm_converged"] = norm ? Json(norm->converged) : Json(nullptr);
  rec["evidence_rate"] = verdict.evidence_rate;
  Json radii = Json::array();
  Json logs = Json::array();
  for (const auto& e : verdict.evidence) {
    radii.push_back(e.radius);
    logs.push_back(e.log_integral);
  }
  rec["evidence_radius"] = std::move(radii);
  rec["evidence_log_integral"] = std::move(logs);
  rec["interpretation"] = verdict.interpretation;
  rep.records.push_back(std::move(rec));
  rep.exit_code = verdict.member ? kOk : kNonMember;
  return rep;
}

Report cmd_converge(const Json& c) {
  const KernelKind kind = parse_kernel_kind(text(c, "kind"));
  const InitialDatum f = parse_datum(text(c, "datum"));
  const Point x = resolve_point(c);
  ConvergeOptions opts;
  opts.t0 = number(c, "t0");
  opts.steps = static_cast<int>(integer(c, "steps"));
  opts.shrink = number(c, "shrink");
  opts.threshold = number(c, "threshold");
  const ConvergenceReport r = converge(kind, f, x, opts, quadrature_config(c));

  Report rep;
  rep.columns = {"k", "t_k", "u", "f", "abs_err"};
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    Json rec;
    rec["k"] = static_cast<long>(i + 1);
    rec["t_k"] = r.times[i];
    rec["u"] = r.values[i];
    rec["f"] = r.target;
    rec["abs_err"] = r.errors[i];
    rep.records.push_back(std::move(rec));
  }
  rep.summary["converged"] = r.converged;
  rep.summary["divergence_index"] =
      r.divergence_index ? Json(*r.divergence_index) : Json(nullptr);
  rep.exit_code = r.divergence_index ? kDivergent : (r.converged ? kOk : kNotConverged);
  return rep;
}

Report cmd_maximal(const Json& c) {
  const KernelKind kind = parse_kernel_kind(text(c, "kind"));
  const InitialDatum f = parse_datum(text(c, "datum"));
  const Point x = resolve_point(c);
  const MaximalReport r = maximal(kind, f, x, number(c, "horizon"),
                                  static_cast<int>(integer(c, "grid")), quadrature_config(c));

  Report rep;
  rep.columns = {"j", "t_j", "u", "running_sup"};
  double running = 0.0;
  for (std::size_t j = 0; j < r.time_grid.size(); ++j) {
    running = std::max(running, std::abs(r.values[j]));
    Json rec;
    rec["j"] = static_cast<long>(j + 1);
    rec["t_j"] = r.time_grid[j];
    rec["u"] = r.values[j];
    rec["running_sup"] = running;
    rep.records.push_back(std::move(rec));
  }
  rep.summary["finite"] = r.finite;
  rep.summary["sup"] = r.finite ? Json(r.sup_value) : Json(nullptr);
  rep.summary["argmax_time"] = r.argmax_time;
  rep.exit_code = r.finite ? kOk : kDivergent;
  return rep;
}

void append_check_rows(const CheckReport& r, const std::string& check, Report& rep) {
  Json rec;
  rec["check"] = check;
  rec["part"] = check == r.check_name ? "" : r.check_name;
  rec["kind"] = r.kind == CheckReport::Kind::Inequality ? "inequality" : "identity";
  rec["samples"] = r.samples;
  rec["tolerance"] = r.tolerance;
  rec["worst_margin"] = r.worst_margin;
  rec["passed"] = r.passed;
  rec["flagged"] = r.flagged;
  rec["worst_sample"] = r.worst_sample ? Json(r.worst_sample->describe()) : Json(nullptr);
  rep.records.push_back(std::move(rec));
  for (const auto& part : r.parts) append_check_rows(part, check, rep);
}

Report cmd_verify(const Json& c, const std::vector<std::string>& requested) {
  std::vector<std::string> names;
  for (const auto& name : requested) {
    if (name == "all") {
      names.insert(names.end(), check_names().begin(), check_names().end());
    } else {
      (void)default_sample_count(name);
      names.push_back(name);
    }
  }
  std::optional<long> samples;
  if (has(c, "samples")) {
    samples = integer(c, "samples");
    if (*samples < 1) throw std::invalid_argument("--samples must be positive");
  }
  const long seed = integer(c, "seed");
  if (seed < 0) throw std::invalid_argument("--seed must be nonnegative");
  const QuadratureConfig q = quadrature_config(c);

  Report rep;
  rep.columns = {"check", "part", "kind", "samples", "tolerance",
                 "worst_margin", "passed", "flagged", "worst_sample"};
  bool all_passed = true;
  for (const auto& name : names) {
    const CheckReport r = run_check(name, samples, static_cast<std::uint64_t>(seed), q);
    all_passed = all_passed && r.passed;
    append_check_rows(r, name, rep);
  }
  rep.summary["checks"] = static_cast<long>(names.size());
  rep.summary["all_passed"] = all_passed;
  rep.exit_code = all_passed ? kOk : kNotConverged;
  return rep;
}

Report dispatch(const Invocation& inv) {
  const std::string_view name = inv.command->name;
  if (name == "eval") return cmd_eval(inv.config);
  if (name == "weight") return cmd_weight(inv.config);
  if (name == "converge") return cmd_converge(inv.config);
  if (name == "maximal") return cmd_maximal(inv.config);
  return cmd_verify(inv.config, inv.checks);
}

}  // namespace

std::vector<double> parse_list(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty list");
  std::vector<double> values;
  for (auto part : split(text, ',')) values.push_back(parse_double(part));
  return values;
}

InitialDatum parse_datum(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view family = spec.substr(0, colon);
  const std::string_view params =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (family == "zero") {
    if (colon != std::string_view::npos) throw std::invalid_argument("zero takes no parameters");
    return InitialDatum::zero();
  }
  if (params.empty()) throw std::invalid_argument("datum " + in_quotes(spec) + " needs parameters");
  if (family == "gaussian") {
    auto v = parse_list(params);
    const double a = v.front();
    v.erase(v.begin());
    return InitialDatum::gaussian(a, std::move(v));
  }
  if (family == "hermite-fn") return InitialDatum::hermite_function(parse_indices(params));
  if (family == "hermite-poly") return InitialDatum::hermite_polynomial(parse_indices(params));
  if (family == "box") {
    const auto v = parse_list(params);
    if (v.size() % 2 != 0) throw std::invalid_argument("box needs lo,hi pairs");
    std::vector<double> lo, hi;
    for (std::size_t i = 0; i < v.size(); i += 2) {
      lo.push_back(v[i]);
      hi.push_back(v[i + 1]);
    }
    return InitialDatum::box(std::move(lo), std::move(hi));
  }
  if (family == "quartic-exp") {
    const auto v = parse_list(params);
    if (v.size() != 1) throw std::invalid_argument("quartic-exp takes one coefficient");
    return InitialDatum::quartic_exponential(v.front());
  }
  if (family == "tabulated") {
    std::vector<double> nodes, values;
    for (auto pair : split(params, ',')) {
      const auto slash = pair.find('/');
      if (slash == std::string_view::npos) throw std::invalid_argument("tabulated entries are x/y");
      nodes.push_back(parse_double(pair.substr(0, slash)));
      values.push_back(parse_double(pair.substr(slash + 1)));
    }
    return InitialDatum::tabulated(std::move(nodes), std::move(values));
  }
  throw std::invalid_argument("unknown datum family " + in_quotes(family));
}

WeightSpec parse_weight(std::string_view spec) {
  double tilt = 0.0;
  const auto semi = spec.find(';');
  if (semi != std::string_view::npos) {
    const std::string_view suffix = spec.substr(semi + 1);
    if (!suffix.starts_with("tilt:")) throw std::invalid_argument("expected ;tilt:d after the family");
    tilt = parse_double(suffix.substr(5));
  }
  const std::string_view base = spec.substr(0, semi);
  const auto colon = base.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("weight " + in_quotes(spec) + " needs parameters");
  }
  const std::string_view family = base.substr(0, colon);
  const auto v = parse_list(base.substr(colon + 1));
  const auto expect = [&](std::size_t count) {
    if (v.size() != count) {
      throw std::invalid_argument(std::string(family) + " takes " + std::to_string(count) +
                                  " parameter(s)");
    }
  };
  if (family == "gaussian") {
    expect(1);
    return WeightSpec(WeightSpec::GaussianWeight{v[0]}, tilt);
  }
  if (family == "power") {
    expect(1);
    return WeightSpec(WeightSpec::PowerWeight{v[0]}, tilt);
  }
  if (family == "stretched-exp") {
    expect(2);
    return WeightSpec(WeightSpec::StretchedExp{v[0], v[1]}, tilt);
  }
  if (family == "constant") {
    expect(1);
    return WeightSpec(WeightSpec::Constant{v[0]}, tilt);
  }
  throw std::invalid_argument("unknown weight family " + in_quotes(family));
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heat, Hermite and Ornstein-Uhlenbeck semigroups from explicit kernels", kTool};
  app.require_subcommand(1);
  app.set_version_flag("--version", HEATSG_VERSION);

  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& command : commands()) {
    auto b = std::make_unique<Bound>();
    b->command = &command;
    b->app = app.add_subcommand(command.name, command.description);
    for (const auto& spec : all_options(command)) {
      std::string help = spec.help;
      if (spec.fallback != nullptr) help += std::string(" [") + spec.fallback + "]";
      b->app->add_option(std::string("--") + spec.name, b->raw[spec.name], help);
    }
    b->app->add_option("--out", b->out_path, "write the report to this file");
    b->app->add_option("--config", b->config_path,
                       "JSON object of option values keyed by long flag name");
    if (std::string_view(command.name) == "verify") {
      b->app->add_option("checks", b->checks, "check names or all")->required();
    }
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  const Bound* chosen = nullptr;
  for (const auto& b : bound) {
    if (b->app->parsed()) chosen = b.get();
  }
  try {
    const Invocation inv = resolve(*chosen);
    const Report report = dispatch(inv);
    const std::string body = render(inv, report);
    if (inv.out_path.empty()) {
      out << body;
    } else {
      write_atomically(inv.out_path, body);
    }
    return report.exit_code;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n" << "see " << kTool << " " << chosen->command->name
        << " --help\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  }
}

}  // namespace heatsg::cli
