#include "fwav/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fwav/errors.hpp"

namespace fwav::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidInput("not a number for '" + context + "': '" + t + "'");
  }
  return value;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

KeyValueDocument KeyValueDocument::parse(const std::string& text) {
  KeyValueDocument doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    doc.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::string& path) {
  return parse(read_text_file(path));
}

double KeyValueDocument::number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("missing key '" + key + "'");
  return parse_double(it->second, key);
}

double KeyValueDocument::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

const std::string& KeyValueDocument::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("missing key '" + key + "'");
  return it->second;
}

void KeyValueDocument::set(const std::string& key, double value) { set(key, format_number(value)); }

void KeyValueDocument::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw InvalidInput("empty key");
  if (!has(key)) order_.push_back(key);
  values_[key] = value;
}

std::string KeyValueDocument::to_string() const {
  std::ostringstream out;
  for (const auto& k : order_) out << k << " = " << values_.at(k) << '\n';
  return out.str();
}

void KeyValueDocument::save(const std::string& path) const { write_text_file(path, to_string()); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << contents;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw InvalidInput("CSV has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(static_cast<std::size_t>(c)));
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InvalidInput("CSV row width " + std::to_string(cells.size()) + " does not match header");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) row.push_back(parse_double(cells[i], t.header[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

std::string to_csv(const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& r : table.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace fwav::io
