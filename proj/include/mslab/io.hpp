#pragma once

#include <map>
#include <string>
#include <vector>

#include "mslab/grid.hpp"

namespace mslab {

/* Small JSON value for report emission.  Object keys are kept sorted, and
 * doubles are printed in shortest round-trip form, so a report serializes to
 * the same bytes whenever the same values go in. */
class Json {
 public:
  Json() : kind_(Kind::null) {}
  Json(bool b) : kind_(Kind::boolean), b_(b) {}
  Json(int v) : kind_(Kind::integer), i_(v) {}
  Json(long long v) : kind_(Kind::integer), i_(v) {}
  Json(unsigned long long v) : kind_(Kind::integer), i_(static_cast<long long>(v)) {}
  Json(double v) : kind_(Kind::number), d_(v) {}
  Json(const char* s) : kind_(Kind::string), s_(s) {}
  Json(std::string s) : kind_(Kind::string), s_(std::move(s)) {}

  static Json object();
  static Json array();

  Json& set(const std::string& key, Json value);   // objects
  Json& push(Json value);                          // arrays
  static Json number_array(const std::vector<double>& values);

  std::string dump(int indent = 2) const;

 private:
  enum class Kind { null, boolean, integer, number, string, object, array };
  void emit(std::string& out, int indent, int depth) const;
  Kind kind_;
  bool b_ = false;
  long long i_ = 0;
  double d_ = 0.0;
  std::string s_;
  std::map<std::string, Json> obj_;
  std::vector<Json> arr_;
};

void write_text_file(const std::string& path, const std::string& content);

/* rows of already formatted cells; the writer joins with commas */
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);  // shortest round-trip

/* Cell-centered dump: r,theta,value with one row per cell. */
void save_field_csv(const std::string& path, const PolarField& field);

void ensure_directory(const std::string& path);

}  // namespace mslab
