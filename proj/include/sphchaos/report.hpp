#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace sphchaos::report {

// %.17g, so values round-trip; NaN becomes an empty field.
std::string format_real(double v);

// Quotes a field when it holds a comma, quote or line break (RFC 4180).
std::string csv_escape(const std::string& field);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  const std::string& path() const { return path_; }

 private:
  void write(const std::vector<std::string>& fields);
  std::string path_;
  std::size_t width_;
  std::ofstream out_;
};

// Whitespace-separated two-column file; points with a non-finite coordinate
// are skipped.
void write_dat(const std::string& path, const std::string& comment, const std::vector<double>& x,
               const std::vector<double>& y);

}  // namespace sphchaos::report
