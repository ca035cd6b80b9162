#include "convexdom/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace convexdom {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::ExactPass: return "exact-pass";
    case CheckStatus::BandPass: return "band-pass";
    default: return "fail";
  }
}

bool Report::any_exact_fail() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::Fail && c.tolerance == 0) return true;
  return false;
}

bool Report::any_band_fail() const {
  for (const auto& c : checks)
    if (c.status == CheckStatus::Fail && c.tolerance != 0) return true;
  return false;
}

int Report::exit_code() const {
  if (any_exact_fail()) return 3;
  if (any_band_fail()) return 2;
  return 0;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string json_number(double v) {
  if (std::isnan(v)) return "\"nan\"";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  return format_double(v);
}

}  // namespace

std::string Report::to_json() const {
  std::ostringstream os;
  os << "{\n  \"command\": \"" << json_escape(command) << "\",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"config\": \"" << json_escape(config_echo) << "\",\n";
  os << "  \"elapsed_seconds\": " << json_number(elapsed_seconds) << ",\n";
  os << "  \"checks\": [\n";
  for (size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    os << "    {\"name\": \"" << json_escape(c.name) << "\", \"anchor\": \""
       << json_escape(c.anchor) << "\", \"status\": \"" << status_name(c.status)
       << "\", \"tolerance\": " << json_number(c.tolerance) << ", \"values\": {";
    size_t k = 0;
    for (const auto& [key, val] : c.values) {
      os << "\"" << json_escape(key) << "\": " << json_number(val);
      if (++k < c.values.size()) os << ", ";
    }
    os << "}}";
    if (i + 1 < checks.size()) os << ",";
    os << "\n";
  }
  os << "  ]\n}\n";
  return os.str();
}

std::string CsvTable::to_csv() const {
  std::ostringstream os;
  for (size_t i = 0; i < columns.size(); ++i) {
    os << columns[i];
    if (i + 1 < columns.size()) os << ",";
  }
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      os << format_double(row[i]);
      if (i + 1 < row.size()) os << ",";
    }
    os << "\n";
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace convexdom
