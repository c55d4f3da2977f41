#pragma once

// CSV emission: comma separated, one header row, LF endings, '.' decimal
// separator, full double precision (17 significant digits) so that byte
// comparison doubles as numeric regression. A sidecar `<path>.meta` records
// the fully resolved configuration and the code version; only its timestamp
// line may differ between identical runs.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "qbring/errors.hpp"
#include "qbring/version.hpp"

namespace qbring {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open output file '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_double(values[i]);
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

inline void write_metadata(const std::string& csv_path, const std::string& command,
                           const std::map<std::string, std::string>& resolved) {
  std::ofstream meta(csv_path + ".meta", std::ios::binary);
  if (!meta) throw ConfigError("cannot open metadata file '" + csv_path + ".meta'");
  meta << "command = " << command << '\n';
  meta << "version = " << kVersion << '\n';
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  meta << "timestamp = " << stamp << '\n';
  for (const auto& [key, value] : resolved) meta << key << " = " << value << '\n';
}

}  // namespace qbring
