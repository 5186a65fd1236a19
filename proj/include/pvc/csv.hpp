#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pvc/quad.hpp"

namespace pvc {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Comma-separated, '.' decimal, header row, LF line endings, 17 significant
// digits for reals.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    append_row_raw(header);
  }

  void append(const std::vector<std::string>& cells) { append_row_raw(cells); }

  void append(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_real(v));
    append_row_raw(cells);
  }

  const std::string& content() const { return body_; }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EvaluationError("cannot open output file " + path.string());
    out << body_;
  }

 private:
  void append_row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw ParameterError("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }

  std::size_t columns_;
  std::string body_;
};

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Manifest of produced files with content hashes; the timestamp lives only
// here so data files stay byte-identical across reruns.
class Manifest {
 public:
  void add(const std::string& filename, const std::string& content) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(content)));
    entries_.push_back(filename + "," + buf);
  }

  void write(const std::filesystem::path& dir, const std::string& stamp) const {
    std::ofstream out(dir / "manifest.csv", std::ios::binary);
    if (!out) throw EvaluationError("cannot open manifest in " + dir.string());
    out << "file,fnv1a64\n";
    for (const auto& e : entries_) out << e << '\n';
    if (!stamp.empty()) out << "_generated," << stamp << '\n';
  }

 private:
  std::vector<std::string> entries_;
};

inline void write_csv(const std::filesystem::path& dir, const std::string& name,
                      const CsvWriter& csv, Manifest& manifest) {
  std::filesystem::create_directories(dir);
  csv.write(dir / name);
  manifest.add(name, csv.content());
}

}  // namespace pvc
