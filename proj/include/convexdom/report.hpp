#pragma once

#include <map>
#include <string>
#include <vector>

namespace convexdom {

enum class CheckStatus { ExactPass, BandPass, Fail };
const char* status_name(CheckStatus s);

struct CheckRecord {
  std::string name;
  std::string anchor = "plumbing";  // which construction the check exercises
  CheckStatus status = CheckStatus::ExactPass;
  std::map<std::string, double> values;
  double tolerance = 0;
};

struct Report {
  std::string command;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  double elapsed_seconds = 0;

  void add(CheckRecord rec) { checks.push_back(std::move(rec)); }
  bool any_exact_fail() const;
  bool any_band_fail() const;
  // 0 all pass, 2 band fail, 3 exact fail
  int exit_code() const;
  std::string to_json() const;
};

// 12 significant digits, matching the CSV contract
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string to_csv() const;
};

void write_file(const std::string& path, const std::string& content);

}  // namespace convexdom
