#include "mslab/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mslab {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/* Strip a trailing comment that is not inside a quoted string. */
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

double parse_number(const std::string& tok, const std::string& origin, int line,
                    bool& is_int, long long& as_int) {
  std::string t = tok;
  t.erase(std::remove(t.begin(), t.end(), '_'), t.end());
  is_int = t.find_first_of(".eEninf") == std::string::npos;
  if (t == "inf" || t == "+inf" || t == "-inf" || t == "nan")
    fail(origin, line, "non-finite numbers are not accepted: '" + tok + "'");
  try {
    size_t used = 0;
    if (is_int) {
      as_int = std::stoll(t, &used);
      if (used != t.size()) fail(origin, line, "trailing characters in number '" + tok + "'");
      return static_cast<double>(as_int);
    }
    double d = std::stod(t, &used);
    if (used != t.size()) fail(origin, line, "trailing characters in number '" + tok + "'");
    return d;
  } catch (const std::exception&) {
    fail(origin, line, "cannot parse number '" + tok + "'");
  }
}

}  // namespace

TomlDoc TomlDoc::parse_string(const std::string& text, const std::string& origin) {
  TomlDoc doc;
  doc.origin_ = origin;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail(origin, lineno, "bad section name '" + section + "'");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(origin, lineno, "bad key '" + key + "'");
    if (val.empty()) fail(origin, lineno, "missing value for '" + key + "'");

    Value v;
    v.line = lineno;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        fail(origin, lineno, "unterminated string for '" + key + "'");
      v.kind = Value::Kind::string;
      v.s = val.substr(1, val.size() - 2);
      if (v.s.find('"') != std::string::npos)
        fail(origin, lineno, "embedded quote in string for '" + key + "'");
    } else if (val == "true" || val == "false") {
      v.kind = Value::Kind::boolean;
      v.b = (val == "true");
    } else if (val.front() == '[') {
      if (val.back() != ']') fail(origin, lineno, "unterminated array for '" + key + "'");
      v.kind = Value::Kind::array;
      std::string inner = trim(val.substr(1, val.size() - 2));
      if (!inner.empty()) {
        std::istringstream items(inner);
        std::string tok;
        while (std::getline(items, tok, ',')) {
          tok = trim(tok);
          if (tok.empty()) fail(origin, lineno, "empty array element for '" + key + "'");
          bool is_int = false;
          long long ival = 0;
          v.arr.push_back(parse_number(tok, origin, lineno, is_int, ival));
        }
      }
    } else {
      bool is_int = false;
      long long ival = 0;
      const double d = parse_number(val, origin, lineno, is_int, ival);
      if (is_int) {
        v.kind = Value::Kind::integer;
        v.i = ival;
        v.d = d;
      } else {
        v.kind = Value::Kind::floating;
        v.d = d;
      }
    }
    const std::string dotted = section.empty() ? key : section + "." + key;
    if (doc.values_.count(dotted))
      fail(origin, lineno, "duplicate key '" + dotted + "'");
    doc.values_[dotted] = std::move(v);
  }
  return doc;
}

TomlDoc TomlDoc::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

const TomlDoc::Value& TomlDoc::require(const std::string& dotted) const {
  auto it = values_.find(dotted);
  if (it == values_.end())
    throw std::runtime_error(origin_ + ": missing required key '" + dotted + "'");
  return it->second;
}

bool TomlDoc::has(const std::string& dotted) const { return values_.count(dotted) > 0; }

std::string TomlDoc::get_string(const std::string& dotted) const {
  const Value& v = require(dotted);
  if (v.kind != Value::Kind::string)
    throw std::runtime_error(origin_ + ":" + std::to_string(v.line) + ": '" + dotted +
                             "' must be a string");
  return v.s;
}

bool TomlDoc::get_bool(const std::string& dotted) const {
  const Value& v = require(dotted);
  if (v.kind != Value::Kind::boolean)
    throw std::runtime_error(origin_ + ":" + std::to_string(v.line) + ": '" + dotted +
                             "' must be a boolean");
  return v.b;
}

long long TomlDoc::get_int(const std::string& dotted) const {
  const Value& v = require(dotted);
  if (v.kind != Value::Kind::integer)
    throw std::runtime_error(origin_ + ":" + std::to_string(v.line) + ": '" + dotted +
                             "' must be an integer");
  return v.i;
}

double TomlDoc::get_double(const std::string& dotted) const {
  const Value& v = require(dotted);
  if (v.kind != Value::Kind::integer && v.kind != Value::Kind::floating)
    throw std::runtime_error(origin_ + ":" + std::to_string(v.line) + ": '" + dotted +
                             "' must be a number");
  return v.d;
}

std::vector<double> TomlDoc::get_double_array(const std::string& dotted) const {
  const Value& v = require(dotted);
  if (v.kind != Value::Kind::array)
    throw std::runtime_error(origin_ + ":" + std::to_string(v.line) + ": '" + dotted +
                             "' must be an array");
  return v.arr;
}

std::string TomlDoc::get_string_or(const std::string& dotted,
                                   const std::string& dflt) const {
  return has(dotted) ? get_string(dotted) : dflt;
}
bool TomlDoc::get_bool_or(const std::string& dotted, bool dflt) const {
  return has(dotted) ? get_bool(dotted) : dflt;
}
long long TomlDoc::get_int_or(const std::string& dotted, long long dflt) const {
  return has(dotted) ? get_int(dotted) : dflt;
}
double TomlDoc::get_double_or(const std::string& dotted, double dflt) const {
  return has(dotted) ? get_double(dotted) : dflt;
}
std::vector<double> TomlDoc::get_double_array_or(
    const std::string& dotted, const std::vector<double>& dflt) const {
  return has(dotted) ? get_double_array(dotted) : dflt;
}

std::vector<std::string> TomlDoc::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

RunConfig RunConfig::from_toml(const TomlDoc& doc) {
  RunConfig c;
  c.family = doc.get_string("geometry.family");
  if (c.family != "example1" && c.family != "example2" && c.family != "constant")
    throw std::runtime_error("geometry.family must be example1, example2 or constant");
  c.phi = doc.get_double_or("geometry.phi", c.phi);
  c.eps = doc.get_double_or("geometry.eps", c.eps);
  c.k = doc.get_double_or("geometry.k", c.k);
  c.r0 = doc.get_double_or("geometry.r0", c.r0);
  c.c1 = doc.get_double_or("geometry.c1", c.c1);
  c.c4 = doc.get_double_or("geometry.c4", c.c4);
  c.t_flat = doc.get_double_or("geometry.t_flat", c.t_flat);
  c.r_max = doc.get_double_or("geometry.r_max", c.r_max);
  c.jacobi_step = doc.get_double_or("geometry.jacobi_step", c.jacobi_step);
  c.scan_max = doc.get_double_or("geometry.scan_max", c.scan_max);
  if (!(c.r_max > 0.0)) throw std::runtime_error("geometry.r_max must be positive");
  if (!(c.jacobi_step > 0.0) || c.jacobi_step > 0.1)
    throw std::runtime_error("geometry.jacobi_step must lie in (0, 0.1]");

  c.op_name = doc.get_string_or("operator.name", c.op_name);
  if (c.op_name != "minimal_graph" && c.op_name != "p_laplace" && c.op_name != "custom")
    throw std::runtime_error("operator.name must be minimal_graph, p_laplace or custom");
  c.op_p = doc.get_double_or("operator.p", c.op_p);
  c.op_coeff = doc.get_double_or("operator.coeff", c.op_coeff);
  c.op_e1 = doc.get_double_or("operator.e1", c.op_e1);
  c.op_e2 = doc.get_double_or("operator.e2", c.op_e2);

  c.nr = static_cast<int>(doc.get_int_or("grid.nr", c.nr));
  c.ntheta = static_cast<int>(doc.get_int_or("grid.ntheta", c.ntheta));
  c.r_inner = doc.get_double_or("grid.r_inner", c.r_inner);
  if (c.nr < 4) throw std::runtime_error("grid.nr must be at least 4");
  if (c.ntheta < 4 || c.ntheta % 2)
    throw std::runtime_error("grid.ntheta must be even and at least 4");
  if (c.r_inner < 0.0 || c.r_inner >= c.r_max)
    throw std::runtime_error("grid.r_inner must lie in [0, r_max)");

  c.theta0 = doc.get_double_or("barrier.theta0", c.theta0);
  c.slope = doc.get_double_or("barrier.slope", c.slope);
  c.r4_max = doc.get_double_or("barrier.r4_max", c.r4_max);
  c.strict_asymptotic_gates =
      doc.get_bool_or("barrier.strict_asymptotic_gates", c.strict_asymptotic_gates);
  c.cert_samples = static_cast<int>(doc.get_int_or("barrier.cert_samples", c.cert_samples));
  if (!(c.slope > 0.0)) throw std::runtime_error("barrier.slope must be positive");
  if (c.cert_samples < 100)
    throw std::runtime_error("barrier.cert_samples must be at least 100");

  c.data_offset = doc.get_double_or("data.offset", c.data_offset);
  c.data_amplitude = doc.get_double_or("data.amplitude", c.data_amplitude);
  c.data_mode = static_cast<int>(doc.get_int_or("data.mode", c.data_mode));
  c.data_phase = doc.get_double_or("data.phase", c.data_phase);
  if (c.data_mode < 0) throw std::runtime_error("data.mode must be nonnegative");

  c.check_r = doc.get_double_or("check.r", c.check_r);
  c.check_samples = static_cast<int>(doc.get_int_or("check.samples", c.check_samples));
  if (c.check_r < 0.0) throw std::runtime_error("check.r must be nonnegative");
  if (c.check_samples < 20)
    throw std::runtime_error("check.samples must be at least 20");

  c.radii = doc.get_double_array_or("exhaustion.radii", c.radii);
  c.compacts = doc.get_double_array_or("exhaustion.compacts", c.compacts);
  c.envelope_eps = doc.get_double_or("exhaustion.envelope_eps", c.envelope_eps);
  for (size_t i = 1; i < c.radii.size(); ++i)
    if (!(c.radii[i] > c.radii[i - 1]))
      throw std::runtime_error("exhaustion.radii must be strictly increasing");
  if (!c.radii.empty() && c.radii.back() > c.r_max)
    throw std::runtime_error("exhaustion.radii must stay within geometry.r_max");
  if (!(c.envelope_eps > 0.0))
    throw std::runtime_error("exhaustion.envelope_eps must be positive");

  c.tol_factor = doc.get_double_or("solver.tol_factor", c.tol_factor);
  c.max_newton = static_cast<int>(doc.get_int_or("solver.max_newton", c.max_newton));
  if (!(c.tol_factor > 0.0)) throw std::runtime_error("solver.tol_factor must be positive");

  c.seed = static_cast<unsigned long long>(doc.get_int_or("run.seed", 1));
  c.out_dir = doc.get_string_or("run.out_dir", c.out_dir);
  return c;
}

}  // namespace mslab
