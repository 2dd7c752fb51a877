#pragma once

#include <map>
#include <string>
#include <vector>

namespace fwav::io {

/// Flat `key = value` document. Blank lines and `#` comments are ignored;
/// keys keep insertion order on output.
class KeyValueDocument {
 public:
  static KeyValueDocument parse(const std::string& text);
  static KeyValueDocument load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  const std::string& text(const std::string& key) const;

  void set(const std::string& key, double value);
  void set(const std::string& key, const std::string& value);

  std::string to_string() const;
  void save(const std::string& path) const;

  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

/// Shortest round-trippable decimal form of a double.
std::string format_number(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

/// Minimal CSV table: one header row, numeric body.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> column_values(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);
std::string to_csv(const CsvTable& table);

}  // namespace fwav::io
