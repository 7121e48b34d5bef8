#include "mslab/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mslab {

Json Json::object() {
  Json j;
  j.kind_ = Kind::object;
  return j;
}

Json Json::array() {
  Json j;
  j.kind_ = Kind::array;
  return j;
}

Json& Json::set(const std::string& key, Json value) {
  if (kind_ != Kind::object) throw std::logic_error("Json::set on non-object");
  obj_[key] = std::move(value);
  return *this;
}

Json& Json::push(Json value) {
  if (kind_ != Kind::array) throw std::logic_error("Json::push on non-array");
  arr_.push_back(std::move(value));
  return *this;
}

Json Json::number_array(const std::vector<double>& values) {
  Json j = array();
  for (double v : values) j.push(Json(v));
  return j;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "1e308" : (v < 0 ? "-1e308" : "0");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char hex[8];
          std::snprintf(hex, sizeof(hex), "\\u%04x", c);
          out += hex;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

void Json::emit(std::string& out, int indent, int depth) const {
  const std::string pad(static_cast<size_t>(indent) * (depth + 1), ' ');
  const std::string close_pad(static_cast<size_t>(indent) * depth, ' ');
  switch (kind_) {
    case Kind::null: out += "null"; break;
    case Kind::boolean: out += b_ ? "true" : "false"; break;
    case Kind::integer: out += std::to_string(i_); break;
    case Kind::number: out += format_double(d_); break;
    case Kind::string:
      out += '"';
      out += escape(s_);
      out += '"';
      break;
    case Kind::object: {
      if (obj_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      size_t n = 0;
      for (const auto& [k, v] : obj_) {
        out += pad;
        out += '"';
        out += escape(k);
        out += "\": ";
        v.emit(out, indent, depth + 1);
        if (++n < obj_.size()) out += ',';
        out += '\n';
      }
      out += close_pad;
      out += '}';
      break;
    }
    case Kind::array: {
      if (arr_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (size_t n = 0; n < arr_.size(); ++n) {
        out += pad;
        arr_[n].emit(out, indent, depth + 1);
        if (n + 1 < arr_.size()) out += ',';
        out += '\n';
      }
      out += close_pad;
      out += ']';
      break;
    }
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  emit(out, indent, 0);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto join = [&out](const std::vector<std::string>& cells) {
    for (size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  join(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: row width does not match header");
    join(row);
  }
  write_text_file(path, out);
}

void save_field_csv(const std::string& path, const PolarField& field) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<size_t>(field.grid.cells()));
  for (int i = 0; i < field.grid.nr; ++i)
    for (int j = 0; j < field.grid.ntheta; ++j)
      rows.push_back({format_double(field.grid.r_center(i)),
                      format_double(field.grid.theta(j)),
                      format_double(field.at(i, j))});
  write_csv(path, {"r", "theta", "value"}, rows);
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + path + "'");
}

}  // namespace mslab
