#include "eggp/config.hpp"

#include <cctype>
#include <charconv>

#include "eggp/errors.hpp"
#include "eggp/io.hpp"

namespace eggp::config {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a # comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

struct Scalar {
  enum class Kind { boolean, integer, real, text } kind;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
};

Scalar parse_scalar(const std::string& raw, const std::string& where) {
  const std::string t = trim(raw);
  if (t.empty()) throw ConfigError(where + ": empty value");
  if (t == "true") return {Scalar::Kind::boolean, true, 0, 0.0, {}};
  if (t == "false") return {Scalar::Kind::boolean, false, 0, 0.0, {}};
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw ConfigError(where + ": unterminated string");
    return {Scalar::Kind::text, false, 0, 0.0, t.substr(1, t.size() - 2)};
  }
  std::int64_t iv = 0;
  auto ir = std::from_chars(t.data(), t.data() + t.size(), iv);
  if (ir.ec == std::errc() && ir.ptr == t.data() + t.size())
    return {Scalar::Kind::integer, false, iv, 0.0, {}};
  double dv = 0.0;
  auto dr = std::from_chars(t.data(), t.data() + t.size(), dv);
  if (dr.ec == std::errc() && dr.ptr == t.data() + t.size())
    return {Scalar::Kind::real, false, 0, dv, {}};
  throw ConfigError(where + ": cannot parse value '" + t + "'");
}

std::vector<std::string> split_items(const std::string& body,
                                     const std::string& where) {
  std::vector<std::string> items;
  std::string cur;
  bool in_quote = false;
  for (char c : body) {
    if (c == '"') in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      items.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_quote) throw ConfigError(where + ": unterminated string");
  if (!trim(cur).empty()) items.push_back(cur);
  return items;
}

Value parse_value(const std::string& raw, const std::string& where) {
  const std::string t = trim(raw);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError(where + ": unterminated array");
    const auto items = split_items(t.substr(1, t.size() - 2), where);
    if (items.empty()) return std::vector<double>{};
    std::vector<Scalar> scalars;
    scalars.reserve(items.size());
    bool any_real = false;
    const auto is_text = [](const Scalar& s) {
      return s.kind == Scalar::Kind::text;
    };
    for (const auto& it : items) {
      scalars.push_back(parse_scalar(it, where));
      const auto k = scalars.back().kind;
      if (k == Scalar::Kind::boolean)
        throw ConfigError(where + ": boolean arrays are not supported");
      if (k == Scalar::Kind::real) any_real = true;
      if (is_text(scalars.back()) != is_text(scalars.front()))
        throw ConfigError(where + ": mixed array element types");
    }
    if (scalars.front().kind == Scalar::Kind::text) {
      std::vector<std::string> out;
      for (auto& s : scalars) out.push_back(std::move(s.s));
      return out;
    }
    if (any_real) {
      std::vector<double> out;
      for (const auto& s : scalars)
        out.push_back(s.kind == Scalar::Kind::real ? s.d
                                                   : static_cast<double>(s.i));
      return out;
    }
    std::vector<std::int64_t> out;
    for (const auto& s : scalars) out.push_back(s.i);
    return out;
  }
  const Scalar s = parse_scalar(t, where);
  switch (s.kind) {
    case Scalar::Kind::boolean: return s.b;
    case Scalar::Kind::integer: return s.i;
    case Scalar::Kind::real: return s.d;
    case Scalar::Kind::text: return s.s;
  }
  throw ConfigError(where + ": unreachable");
}

}  // namespace

const Value* Section::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

void Section::fail(const std::string& key, const std::string& why) const {
  throw ConfigError(origin_ + ": [" + name_ + "] " + key + ": " + why);
}

bool Section::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  fail(key, "expected a boolean");
}

std::int64_t Section::get_int(const std::string& key,
                              std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  fail(key, "expected an integer");
}

double Section::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(v))
    return static_cast<double>(*i);
  fail(key, "expected a number");
}

std::string Section::get_string(const std::string& key,
                                std::string fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  fail(key, "expected a string");
}

std::int64_t Section::require_int(const std::string& key) const {
  if (!has(key)) fail(key, "missing required key");
  return get_int(key, 0);
}

double Section::require_double(const std::string& key) const {
  if (!has(key)) fail(key, "missing required key");
  return get_double(key, 0.0);
}

std::string Section::require_string(const std::string& key) const {
  if (!has(key)) fail(key, "missing required key");
  return get_string(key, {});
}

std::vector<std::int64_t> Section::get_int_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (const auto* a = std::get_if<std::vector<std::int64_t>>(v)) return *a;
  if (const auto* d = std::get_if<std::vector<double>>(v)) {
    if (d->empty()) return {};
    fail(key, "expected an integer array");
  }
  fail(key, "expected an integer array");
}

std::vector<double> Section::get_double_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (const auto* d = std::get_if<std::vector<double>>(v)) return *d;
  if (const auto* a = std::get_if<std::vector<std::int64_t>>(v)) {
    std::vector<double> out;
    out.reserve(a->size());
    for (auto i : *a) out.push_back(static_cast<double>(i));
    return out;
  }
  fail(key, "expected a numeric array");
}

std::vector<std::string> Section::get_string_array(
    const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (const auto* s = std::get_if<std::vector<std::string>>(v)) return *s;
  if (const auto* d = std::get_if<std::vector<double>>(v)) {
    if (d->empty()) return {};
    fail(key, "expected a string array");
  }
  fail(key, "expected a string array");
}

void Section::finish() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key))
      throw ConfigError(origin_ + ": unknown key '" + key + "' in [" + name_ +
                        "]");
}

Table Table::parse(const std::string& text, const std::string& origin) {
  Table table;
  table.origin_ = origin;
  std::string current = "";
  table.sections_.emplace("", Section("", origin));
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(
        pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ": malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError(where + ": empty section name");
      table.sections_.emplace(current, Section(current, origin));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    Section& sec = table.sections_.at(current);
    if (sec.values_.count(key))
      throw ConfigError(where + ": duplicate key '" + key + "'");
    sec.values_.emplace(key, parse_value(line.substr(eq + 1), where));
  }
  return table;
}

Table Table::parse_file(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path);
}

bool Table::has_section(const std::string& name) const {
  auto it = sections_.find(name);
  return it != sections_.end() || name.empty();
}

const Section& Table::section(const std::string& name) const {
  requested_.insert(name);
  auto it = sections_.find(name);
  if (it != sections_.end()) return it->second;
  auto [e, inserted] = empty_.emplace(name, Section(name, origin_));
  return e->second;
}

std::vector<std::string> Table::section_names() const {
  std::vector<std::string> names;
  for (const auto& [name, sec] : sections_)
    if (!name.empty()) names.push_back(name);
  return names;
}

void Table::finish() const {
  for (const auto& [name, sec] : sections_) {
    if (!name.empty() && !requested_.count(name))
      throw ConfigError(origin_ + ": unknown section [" + name + "]");
    sec.finish();
  }
}

GiConfig gi_config_from(const Section& s) {
  GiConfig cfg;
  cfg.n_rope_nodes = static_cast<int>(s.get_int("n_rope_nodes", cfg.n_rope_nodes));
  cfg.n_ball_nodes = static_cast<int>(s.get_int("n_ball_nodes", cfg.n_ball_nodes));
  cfg.link_length = s.get_double("link_length", cfg.link_length);
  cfg.stiffness = s.get_double("stiffness", cfg.stiffness);
  cfg.damping = s.get_double("damping", cfg.damping);
  cfg.gravity = s.get_double("gravity", cfg.gravity);
  const auto center = s.get_double_array("ball_center");
  if (!center.empty()) {
    if (center.size() != 2)
      throw ConfigError("ball_center must have exactly 2 entries");
    cfg.ball_center = {center[0], center[1]};
  }
  cfg.ball_radius = s.get_double("ball_radius", cfg.ball_radius);
  cfg.rope_offset = s.get_double("rope_offset", cfg.rope_offset);
  cfg.rope_start_height = s.get_double("rope_start_height", cfg.rope_start_height);
  cfg.node_mass = s.get_double("node_mass", cfg.node_mass);
  cfg.contact_restitution = s.get_double("contact_restitution", cfg.contact_restitution);
  cfg.steps = static_cast<int>(s.get_int("steps", cfg.steps));
  cfg.dt = s.get_double("dt", cfg.dt);
  cfg.validate();
  return cfg;
}

EisConfig eis_config_from(const Section& s) {
  EisConfig cfg;
  cfg.n_blocks = static_cast<int>(s.get_int("n_blocks", cfg.n_blocks));
  cfg.particles_per_block =
      static_cast<int>(s.get_int("particles_per_block", cfg.particles_per_block));
  const auto bounds = s.get_double_array("box_bounds");
  if (!bounds.empty()) {
    if (bounds.size() != 4)
      throw ConfigError("box_bounds must be [x_min, x_max, y_min, y_max]");
    cfg.box_bounds = {bounds[0], bounds[1], bounds[2], bounds[3]};
  }
  cfg.gravity = s.get_double("gravity", cfg.gravity);
  cfg.restitution = s.get_double("restitution", cfg.restitution);
  cfg.repulsion_stiffness =
      s.get_double("repulsion_stiffness", cfg.repulsion_stiffness);
  cfg.repulsion_range = s.get_double("repulsion_range", cfg.repulsion_range);
  cfg.damping = s.get_double("damping", cfg.damping);
  cfg.block_spacing = s.get_double("block_spacing", cfg.block_spacing);
  cfg.max_init_speed = s.get_double("max_init_speed", cfg.max_init_speed);
  cfg.steps = static_cast<int>(s.get_int("steps", cfg.steps));
  cfg.dt = s.get_double("dt", cfg.dt);
  cfg.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<std::int64_t>(cfg.seed)));
  cfg.validate();
  return cfg;
}

}  // namespace eggp::config
