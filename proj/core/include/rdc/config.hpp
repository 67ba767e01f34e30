#pragma once

#include "rdc/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rdc {

// Sectioned key = value text.  '#' starts a comment, keys may repeat within
// a section (fix/move lines), and the raw text is kept so a run can echo its
// exact input next to the results.
struct Config {
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
  };

  std::string raw;
  std::vector<Entry> entries;

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int_or(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;
};

Config parse_config(const std::string& text);
Config read_config_file(const std::string& path);

}  // namespace rdc
