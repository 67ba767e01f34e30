#include "rdc/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rdc {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool Config::has(const std::string& section, const std::string& key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return true;
  return false;
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
  for (const auto& e : entries)
    if (e.section == section && e.key == key) return e.value;
  throw Error("config: missing [" + section + "] " + key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

std::vector<std::string> Config::get_all(const std::string& section,
                                         const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.section == section && e.key == key) out.push_back(e.value);
  return out;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw Error("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  return x;
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key) const {
  double x = get_double(section, key);
  int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw Error("config: [" + section + "] " + key + " must be an integer");
  return i;
}

int Config::get_int_or(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = get(section, key);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw Error("config: [" + section + "] " + key + " = '" + v + "' is not a boolean");
}

Config parse_config(const std::string& text) {
  Config cfg;
  cfg.raw = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("config line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw Error("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error("config line " + std::to_string(lineno) + ": empty key");
    cfg.entries.push_back({section, key, value, lineno});
  }
  return cfg;
}

Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace rdc
