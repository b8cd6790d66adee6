#include "remlab/manifest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "remlab/engine.hpp"

namespace remlab {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 6> kKindNames{{
    {ExperimentKind::free_energy, "free_energy"},
    {ExperimentKind::rate_function, "rate_function"},
    {ExperimentKind::marginals, "marginals"},
    {ExperimentKind::exceedance, "exceedance"},
    {ExperimentKind::pd_compare, "pd_compare"},
    {ExperimentKind::diagnostics, "diagnostics"},
}};

// Maps JSON pointers to the line where their value starts. The text has
// already been accepted by nlohmann, so the scanner only has to follow
// structure, not report syntax errors.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : text_(text) {
    skip_ws();
    value("");
  }

  std::size_t line_of(std::string pointer) const {
    while (true) {
      if (auto it = lines_.find(pointer); it != lines_.end()) {
        return it->second;
      }
      if (pointer.empty()) {
        return 1;
      }
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
                                   text_[pos_] == '\n')) {
      if (text_[pos_] == '\n') {
        ++line_;
      }
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        ++pos_;
      }
      out.push_back(text_[pos_]);
      ++pos_;
    }
    ++pos_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') {
        out += "~0";
      } else if (c == '/') {
        out += "~1";
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  void value(const std::string& pointer) {
    lines_.emplace(pointer, line_);
    if (pos_ >= text_.size()) {
      return;
    }
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::string key = string_token();
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        value(pointer + "/" + escape(key));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      std::size_t index = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        value(pointer + "/" + std::to_string(index++));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' && text_[pos_] != ']' &&
             text_[pos_] != ' ' && text_[pos_] != '\n' && text_[pos_] != '\r' && text_[pos_] != '\t') {
        ++pos_;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

class Reader {
 public:
  Reader(const json& root, const LineIndex& index) : root_(root), index_(index) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    const std::string where = pointer.empty() ? "manifest" : pointer.substr(1);
    throw ManifestError(index_.line_of(pointer), where + ": " + message);
  }

  const json& at(const std::string& pointer) const { return root_.at(json::json_pointer(pointer)); }

  bool has(const std::string& pointer) const { return root_.contains(json::json_pointer(pointer)); }

  void only_keys(const std::string& pointer, std::initializer_list<std::string_view> allowed) const {
    const json& obj = at(pointer);
    if (!obj.is_object()) {
      fail(pointer, "expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
      bool known = false;
      for (auto name : allowed) {
        known = known || key == name;
      }
      if (!known) {
        fail(pointer + "/" + key, "unknown field");
      }
    }
  }

  void require(const std::string& pointer) const {
    if (!has(pointer)) {
      fail(pointer.substr(0, pointer.rfind('/')), "missing required field '" + pointer.substr(pointer.rfind('/') + 1) + "'");
    }
  }

  double number(const std::string& pointer) const {
    const json& v = at(pointer);
    if (!v.is_number()) {
      fail(pointer, "expected a number");
    }
    return v.get<double>();
  }

  // Numbers, plus the strings "inf" / "-inf" where infinite values are allowed.
  double extended_number(const std::string& pointer) const {
    const json& v = at(pointer);
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf" || s == "+inf") {
        return std::numeric_limits<double>::infinity();
      }
      if (s == "-inf") {
        return -std::numeric_limits<double>::infinity();
      }
      fail(pointer, "expected a number, \"inf\" or \"-inf\"");
    }
    return number(pointer);
  }

  std::uint64_t unsigned_integer(const std::string& pointer) const {
    const json& v = at(pointer);
    if (v.is_number_unsigned()) {
      return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() || (v.is_number_float() && v.get<double>() < 0.0)) {
      fail(pointer, "expected a nonnegative integer");
    }
    fail(pointer, "expected an integer");
  }

  std::string string(const std::string& pointer) const {
    const json& v = at(pointer);
    if (!v.is_string()) {
      fail(pointer, "expected a string");
    }
    return v.get<std::string>();
  }

  std::size_t array_size(const std::string& pointer) const {
    const json& v = at(pointer);
    if (!v.is_array()) {
      fail(pointer, "expected an array");
    }
    return v.size();
  }

  OpenInterval interval(const std::string& pointer) const {
    if (array_size(pointer) != 2) {
      fail(pointer, "an interval is a two-element array [lo, hi]");
    }
    const double lo = extended_number(pointer + "/0");
    const double hi = extended_number(pointer + "/1");
    if (!(lo < hi)) {
      fail(pointer, "interval needs lo < hi");
    }
    return OpenInterval(lo, hi);
  }

 private:
  const json& root_;
  const LineIndex& index_;
};

json extended_to_json(double x) {
  if (std::isinf(x)) {
    return x > 0 ? json("inf") : json("-inf");
  }
  return json(x);
}

json interval_to_json(const OpenInterval& iv) {
  return json::array({extended_to_json(iv.lo()), extended_to_json(iv.hi())});
}

enum class Field { number, positive_number, unit_number, count, listed_beta, listed_b, interval, interval_list, statistic };

struct CheckSchema {
  std::string_view kind;
  ExperimentKind experiment;
  std::vector<std::pair<std::string_view, Field>> required;
  std::vector<std::pair<std::string_view, Field>> optional;
};

const std::vector<CheckSchema>& check_schemas() {
  static const std::vector<CheckSchema> schemas{
      {"mean_within", ExperimentKind::free_energy, {{"beta", Field::listed_beta}, {"tolerance", Field::positive_number}}, {}},
      {"convex_nondecreasing", ExperimentKind::free_energy, {}, {{"tolerance", Field::number}}},
      {"max_deviation_near", ExperimentKind::free_energy,
       {{"center", Field::number}, {"window", Field::positive_number}}, {}},
      {"rate_in_range", ExperimentKind::rate_function,
       {{"interval", Field::interval}, {"min", Field::number}, {"max", Field::number}}, {}},
      {"no_hits", ExperimentKind::rate_function, {{"interval", Field::interval}}, {}},
      {"fraction_below", ExperimentKind::rate_function,
       {{"intervals", Field::interval_list}, {"bound", Field::unit_number}, {"min_replicas", Field::count}}, {}},
      {"max_marginal_deviation", ExperimentKind::marginals,
       {{"beta", Field::listed_beta}, {"tolerance", Field::positive_number}}, {}},
      {"zero_fraction", ExperimentKind::exceedance, {{"b", Field::listed_b}, {"tolerance", Field::positive_number}}, {}},
      {"count_chi_square", ExperimentKind::exceedance,
       {{"b", Field::listed_b}, {"k_max", Field::count}, {"level", Field::unit_number}}, {}},
      {"positions_ks", ExperimentKind::exceedance, {{"b", Field::listed_b}, {"level", Field::unit_number}}, {}},
      {"gibbs_vs_pd_ks", ExperimentKind::pd_compare,
       {{"statistic", Field::statistic}, {"max_statistic", Field::unit_number}}, {}},
      {"pd_vs_stick_ks", ExperimentKind::pd_compare,
       {{"statistic", Field::statistic}, {"max_statistic", Field::unit_number}}, {}},
      {"bounds_hold", ExperimentKind::diagnostics, {}, {}},
  };
  return schemas;
}

void check_field(const Reader& r, const ExperimentManifest& m, const std::string& pointer, Field field) {
  switch (field) {
    case Field::number:
      if (!std::isfinite(r.number(pointer))) {
        r.fail(pointer, "must be finite");
      }
      break;
    case Field::positive_number:
      if (!(r.number(pointer) > 0.0)) {
        r.fail(pointer, "must be > 0");
      }
      break;
    case Field::unit_number: {
      const double v = r.number(pointer);
      if (!(v > 0.0 && v < 1.0)) {
        r.fail(pointer, "must lie in (0, 1)");
      }
      break;
    }
    case Field::count:
      if (r.unsigned_integer(pointer) < 1) {
        r.fail(pointer, "must be >= 1");
      }
      break;
    case Field::listed_beta:
    case Field::listed_b: {
      const double v = r.number(pointer);
      const auto& pool = field == Field::listed_beta ? m.betas : m.b_levels;
      if (std::find(pool.begin(), pool.end(), v) == pool.end()) {
        r.fail(pointer, std::string("value is not listed under '") +
                            (field == Field::listed_beta ? "betas" : "b_levels") + "'");
      }
      break;
    }
    case Field::interval: {
      const OpenInterval iv = r.interval(pointer);
      bool listed = false;
      for (const auto& known : m.intervals) {
        listed = listed || known == iv;
      }
      if (!listed) {
        r.fail(pointer, "interval " + to_string(iv) + " is not listed under 'intervals'");
      }
      break;
    }
    case Field::interval_list: {
      const std::size_t n = r.array_size(pointer);
      if (n == 0) {
        r.fail(pointer, "needs at least one interval");
      }
      for (std::size_t i = 0; i < n; ++i) {
        check_field(r, m, pointer + "/" + std::to_string(i), Field::interval);
      }
      break;
    }
    case Field::statistic: {
      const std::string s = r.string(pointer);
      if (s != "w1" && s != "w1_plus_w2" && s != "sum_sq") {
        r.fail(pointer, "statistic must be one of w1, w1_plus_w2, sum_sq");
      }
      break;
    }
  }
}

void parse_checks(const Reader& r, ExperimentManifest& m) {
  if (!r.has("/checks")) {
    return;
  }
  const std::size_t count = r.array_size("/checks");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string base = "/checks/" + std::to_string(i);
    if (!r.at(base).is_object()) {
      r.fail(base, "expected an object");
    }
    r.require(base + "/kind");
    const std::string kind = r.string(base + "/kind");
    const CheckSchema* schema = nullptr;
    for (const auto& s : check_schemas()) {
      if (s.kind == kind) {
        schema = &s;
      }
    }
    if (schema == nullptr) {
      r.fail(base + "/kind", "unknown check kind '" + kind + "'");
    }
    if (schema->experiment != m.experiment) {
      r.fail(base + "/kind", "check '" + kind + "' does not apply to " + std::string(to_string(m.experiment)) +
                                 " experiments");
    }
    std::set<std::string_view> allowed{"kind"};
    for (const auto& [name, field] : schema->required) {
      r.require(base + "/" + std::string(name));
      check_field(r, m, base + "/" + std::string(name), field);
      allowed.insert(name);
    }
    for (const auto& [name, field] : schema->optional) {
      if (r.has(base + "/" + std::string(name))) {
        check_field(r, m, base + "/" + std::string(name), field);
      }
      allowed.insert(name);
    }
    CheckSpec check;
    check.kind = kind;
    for (const auto& [key, value] : r.at(base).items()) {
      if (!allowed.contains(key)) {
        r.fail(base + "/" + key, "unknown field for check '" + kind + "'");
      }
      if (key != "kind") {
        check.params[key] = value;
      }
    }
    m.checks.push_back(std::move(check));
  }
}

std::size_t error_line(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    line += text[i] == '\n' ? 1 : 0;
  }
  return line;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) {
      return name;
    }
  }
  return "unknown";
}

ManifestError::ManifestError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

ExperimentManifest parse_manifest(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ManifestError(error_line(text, e.byte > 0 ? e.byte - 1 : 0), std::string("malformed JSON: ") + e.what());
  }
  const LineIndex index(text);
  const Reader r(root, index);
  ExperimentManifest m;

  r.only_keys("", {"experiment", "env", "betas", "replicas", "master_seed", "intervals", "k_marginal", "b_levels",
                   "top_m", "pd", "checks", "output_dir", "workers"});

  r.require("/experiment");
  const std::string kind = r.string("/experiment");
  bool found = false;
  for (const auto& [k, name] : kKindNames) {
    if (name == kind) {
      m.experiment = k;
      found = true;
    }
  }
  if (!found) {
    r.fail("/experiment", "unknown experiment '" + kind + "'");
  }

  r.require("/env");
  r.only_keys("/env", {"alpha", "n"});
  r.require("/env/alpha");
  r.require("/env/n");
  m.alpha = r.number("/env/alpha");
  if (!(m.alpha >= 1.0) || !std::isfinite(m.alpha)) {
    r.fail("/env/alpha", "alpha must be finite and >= 1");
  }
  const std::uint64_t n = r.unsigned_integer("/env/n");
  if (n < 1 || n > static_cast<std::uint64_t>(kMaxSystemSize)) {
    r.fail("/env/n", "n must lie in [1, " + std::to_string(kMaxSystemSize) + "]");
  }
  m.n = static_cast<int>(n);

  r.require("/betas");
  const std::size_t nb = r.array_size("/betas");
  if (nb == 0) {
    r.fail("/betas", "needs at least one beta");
  }
  for (std::size_t i = 0; i < nb; ++i) {
    const std::string p = "/betas/" + std::to_string(i);
    const double b = r.number(p);
    if (!(b > 0.0) || !std::isfinite(b)) {
      r.fail(p, "beta must be finite and > 0");
    }
    m.betas.push_back(b);
  }

  r.require("/replicas");
  m.replicas = r.unsigned_integer("/replicas");
  if (m.replicas < 1) {
    r.fail("/replicas", "replicas must be a positive integer");
  }
  if (m.replicas - 1 > kMaxReplicaId) {
    r.fail("/replicas", "too many replicas");
  }

  r.require("/master_seed");
  m.master_seed = r.unsigned_integer("/master_seed");

  if (r.has("/intervals")) {
    const std::size_t count = r.array_size("/intervals");
    for (std::size_t i = 0; i < count; ++i) {
      m.intervals.push_back(r.interval("/intervals/" + std::to_string(i)));
    }
  }

  if (r.has("/k_marginal")) {
    const std::uint64_t k = r.unsigned_integer("/k_marginal");
    if (k > static_cast<std::uint64_t>(std::min(m.n, kMaxMarginalBlock))) {
      r.fail("/k_marginal", "k_marginal must lie in [0, min(n, " + std::to_string(kMaxMarginalBlock) + ")]");
    }
    m.k_marginal = static_cast<int>(k);
  }

  if (r.has("/b_levels")) {
    const std::size_t count = r.array_size("/b_levels");
    for (std::size_t i = 0; i < count; ++i) {
      const std::string p = "/b_levels/" + std::to_string(i);
      const double b = r.number(p);
      if (!std::isfinite(b)) {
        r.fail(p, "b levels must be finite");
      }
      m.b_levels.push_back(b);
    }
  }

  if (r.has("/top_m")) {
    m.top_m = r.unsigned_integer("/top_m");
    if (m.top_m < 1) {
      r.fail("/top_m", "top_m must be >= 1");
    }
  }

  if (r.has("/pd")) {
    r.only_keys("/pd", {"m", "epsilon_mass", "draws", "max_points", "truncation_b", "stick_length"});
    PDBlock pd;
    r.require("/pd/m");
    pd.m = r.number("/pd/m");
    if (!(pd.m > 0.0 && pd.m < 1.0)) {
      r.fail("/pd/m", "m must lie in (0, 1)");
    }
    if (r.has("/pd/epsilon_mass")) {
      pd.epsilon_mass = r.number("/pd/epsilon_mass");
      if (!(pd.epsilon_mass > 0.0 && pd.epsilon_mass < 1.0)) {
        r.fail("/pd/epsilon_mass", "epsilon_mass must lie in (0, 1)");
      }
    }
    if (r.has("/pd/draws")) {
      pd.draws = r.unsigned_integer("/pd/draws");
      if (pd.draws < 1) {
        r.fail("/pd/draws", "draws must be >= 1");
      }
    }
    if (r.has("/pd/max_points")) {
      pd.max_points = r.unsigned_integer("/pd/max_points");
      if (pd.max_points < 1) {
        r.fail("/pd/max_points", "max_points must be >= 1");
      }
    }
    if (r.has("/pd/truncation_b")) {
      pd.truncation_b = r.number("/pd/truncation_b");
      if (!std::isfinite(pd.truncation_b)) {
        r.fail("/pd/truncation_b", "truncation_b must be finite");
      }
    }
    if (r.has("/pd/stick_length")) {
      pd.stick_length = r.unsigned_integer("/pd/stick_length");
      if (pd.stick_length < 1) {
        r.fail("/pd/stick_length", "stick_length must be >= 1");
      }
    }
    m.pd = pd;
  }

  if (r.has("/output_dir")) {
    m.output_dir = r.string("/output_dir");
    if (m.output_dir.empty()) {
      r.fail("/output_dir", "output_dir must not be empty");
    }
  }

  if (r.has("/workers")) {
    const json& w = r.at("/workers");
    if (w.is_string()) {
      if (w.get<std::string>() != "auto") {
        r.fail("/workers", "workers must be a positive integer or \"auto\"");
      }
    } else {
      const std::uint64_t count = r.unsigned_integer("/workers");
      if (count < 1 || count > 4096) {
        r.fail("/workers", "workers must lie in [1, 4096]");
      }
      m.workers = static_cast<unsigned>(count);
    }
  }

  switch (m.experiment) {
    case ExperimentKind::rate_function:
      if (m.intervals.empty()) {
        r.fail("/intervals", "rate_function experiments need at least one interval");
      }
      break;
    case ExperimentKind::marginals:
      if (m.k_marginal < 1) {
        r.fail(r.has("/k_marginal") ? "/k_marginal" : "", "marginals experiments need k_marginal >= 1");
      }
      break;
    case ExperimentKind::exceedance:
      if (m.b_levels.empty()) {
        r.fail(r.has("/b_levels") ? "/b_levels" : "", "exceedance experiments need at least one b level");
      }
      break;
    case ExperimentKind::pd_compare:
      if (!m.pd) {
        r.fail("", "pd_compare experiments need a 'pd' block");
      }
      if (m.betas.size() != 1 || !(m.betas[0] > 1.0)) {
        r.fail("/betas", "pd_compare takes exactly one beta, and it must exceed 1");
      }
      if (std::abs(m.pd->m * m.betas[0] - 1.0) > 1e-12) {
        r.fail("/pd/m", "pd.m must equal 1/beta");
      }
      break;
    default:
      break;
  }

  parse_checks(r, m);
  return m;
}

json to_json(const ExperimentManifest& m) {
  json out = json::object();
  out["experiment"] = std::string(to_string(m.experiment));
  out["env"] = {{"alpha", m.alpha}, {"n", m.n}};
  out["betas"] = m.betas;
  out["replicas"] = m.replicas;
  out["master_seed"] = m.master_seed;
  out["intervals"] = json::array();
  for (const auto& iv : m.intervals) {
    out["intervals"].push_back(interval_to_json(iv));
  }
  out["k_marginal"] = m.k_marginal;
  out["b_levels"] = m.b_levels;
  out["top_m"] = m.top_m;
  if (m.pd) {
    out["pd"] = {{"m", m.pd->m},
                 {"epsilon_mass", m.pd->epsilon_mass},
                 {"draws", m.pd->draws},
                 {"max_points", m.pd->max_points},
                 {"truncation_b", m.pd->truncation_b},
                 {"stick_length", m.pd->stick_length}};
  }
  out["checks"] = json::array();
  for (const auto& c : m.checks) {
    json obj = c.params;
    obj["kind"] = c.kind;
    out["checks"].push_back(std::move(obj));
  }
  out["output_dir"] = m.output_dir;
  if (m.workers) {
    out["workers"] = *m.workers;
  } else {
    out["workers"] = "auto";
  }
  return out;
}

std::string serialize(const ExperimentManifest& manifest) { return to_json(manifest).dump(2) + "\n"; }

}  // namespace remlab
