#pragma once

#include <fstream>
#include <map>
#include <sstream>

#include "nlspc/core.hpp"

namespace nlspc {

/// Flat key=value configuration with [section] headers.  Keys are stored as
/// "section.key"; the canonical dump (sorted keys) feeds the config hash so
/// archived runs are comparable.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find_first_of("#;");
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        require(line.back() == ']', "config line " + std::to_string(lineno) +
                                        ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      require(eq != std::string::npos,
              "config line " + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
      cfg.kv_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  void set(const std::string& key, const std::string& val) { kv_[key] = val; }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_num(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    require(pos == it->second.size(), "config key " + key + ": bad number '" +
                                          it->second + "'");
    return v;
  }

  int get_int(const std::string& key, int dflt) const {
    double v = get_num(key, double(dflt));
    require(v == std::floor(v), "config key " + key + ": expected an integer");
    return int(v);
  }

  std::vector<double> get_list(const std::string& key,
                               std::vector<double> dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(std::stod(tok));
    }
    require(!out.empty(), "config key " + key + ": empty list");
    return out;
  }

  /// canonical text: sorted "section.key = value" lines
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
  }

  /// FNV-1a over the canonical dump
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }
  std::map<std::string, std::string> kv_;
};

}  // namespace nlspc
