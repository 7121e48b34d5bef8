#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mslab {

/* Minimal TOML reader covering the subset the run files use: [section]
 * headers, key = value with strings, booleans, integers, floats, and flat
 * arrays of those, plus # comments.  Keys are addressed "section.key". */
class TomlDoc {
 public:
  static TomlDoc parse_file(const std::string& path);
  static TomlDoc parse_string(const std::string& text, const std::string& origin);

  bool has(const std::string& dotted) const;
  std::string get_string(const std::string& dotted) const;
  bool get_bool(const std::string& dotted) const;
  long long get_int(const std::string& dotted) const;
  double get_double(const std::string& dotted) const;
  std::vector<double> get_double_array(const std::string& dotted) const;

  std::string get_string_or(const std::string& dotted, const std::string& dflt) const;
  bool get_bool_or(const std::string& dotted, bool dflt) const;
  long long get_int_or(const std::string& dotted, long long dflt) const;
  double get_double_or(const std::string& dotted, double dflt) const;
  std::vector<double> get_double_array_or(const std::string& dotted,
                                          const std::vector<double>& dflt) const;

  std::vector<std::string> keys() const;

 private:
  struct Value {
    enum class Kind { string, boolean, integer, floating, array } kind;
    std::string s;
    bool b = false;
    long long i = 0;
    double d = 0.0;
    std::vector<double> arr;
    int line = 0;
  };
  const Value& require(const std::string& dotted) const;
  std::map<std::string, Value> values_;
  std::string origin_;
};

/* Resolved run description shared by the command line tools. */
struct RunConfig {
  // geometry
  std::string family;            // "example1", "example2", "constant"
  double phi = 2.0;              // example1
  double eps = 0.5;              // example1 / example2
  double k = 1.0;                // example2 / constant
  double r0 = 1.0;               // example1 inner radius of the power branch
  double c1 = 5.0;               // constant-family C1 override
  double c4 = 2.0;               // constant-family C4 override
  double t_flat = 1.0;
  double r_max = 100.0;
  double jacobi_step = 1e-3;
  double scan_max = 100.0;

  // operator
  std::string op_name = "minimal_graph";  // minimal_graph, p_laplace, custom
  double op_p = 2.0;
  double op_coeff = 1.0;
  double op_e1 = 0.0;
  double op_e2 = 0.0;

  // grid
  int nr = 128;
  int ntheta = 128;
  double r_inner = 0.0;

  // barrier
  double theta0 = 0.0;
  double slope = 3.0;            // Lipschitz slope of the cone data
  double r4_max = 0.0;           // 0: derive from the grid
  bool strict_asymptotic_gates = false;
  int cert_samples = 10000;

  // boundary data: offset + amplitude * cos(mode * theta + phase)
  double data_offset = 0.0;
  double data_amplitude = 1.0;
  int data_mode = 1;
  double data_phase = 0.0;

  // assumption checks
  double check_r = 0.0;          // 0: family default
  int check_samples = 2000;

  // exhaustion
  std::vector<double> radii;     // ball exhaustion schedule
  std::vector<double> compacts;  // radii of comparison compacts
  double envelope_eps = 0.2;

  // solver
  double tol_factor = 1e-10;
  int max_newton = 60;

  // misc
  unsigned long long seed = 1;
  std::string out_dir = "out";

  static RunConfig from_toml(const TomlDoc& doc);
};

}  // namespace mslab
