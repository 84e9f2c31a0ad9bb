#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vexlab {

// 12 significant digits; inf / nan spelled out.
std::string fmt(double v);

// FNV-1a 64-bit of a string, as 16 hex digits.
std::string hash_hex(const std::string& text);

// Flat key=value configuration.
struct RunConfig {
  std::map<std::string, std::string> values;

  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values[key] = value; }

  std::string serialize() const;  // sorted key=value lines
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  std::string hash() const { return hash_hex(serialize()); }
};

// CSV builder with a comment header carrying the config hash.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void comment(const std::string& line);
  void row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

// Plain SVG line plot; log axes when requested (non-positive values are dropped).
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series, bool logx, bool logy);

void write_text(const std::string& path, const std::string& text);

}  // namespace vexlab
