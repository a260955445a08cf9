#include "sphchaos/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sphchaos::report {

std::string format_real(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string s = "\"";
  for (char c : field) {
    if (c == '"') s += '"';
    s += c;
  }
  s += '"';
  return s;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), width_(header.size()), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
  write(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw std::logic_error("CsvWriter: row width differs from header");
  write(fields);
}

void CsvWriter::write(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("write failed: " + path_);
}

void write_dat(const std::string& path, const std::string& comment, const std::vector<double>& x,
               const std::vector<double>& y) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# " << comment << '\n';
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    out << format_real(x[i]) << ' ' << format_real(y[i]) << '\n';
  }
}

}  // namespace sphchaos::report
