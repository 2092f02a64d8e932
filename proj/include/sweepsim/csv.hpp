#pragma once

#include <string>
#include <vector>

namespace sweepsim {

// Shortest round-trip decimal formatting, so identical runs produce
// byte-identical files.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

  const std::string& str() const { return out_; }
  void write_file(const std::string& path) const;

 private:
  std::string out_;
  std::size_t columns_;
};

}  // namespace sweepsim
