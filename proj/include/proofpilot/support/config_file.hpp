#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "proofpilot/support/strings.hpp"

namespace proofpilot::support {

// Minimal TOML-style key/value configuration:
//   [section]
//   key = value        # comment
// Values may be quoted. Keys are addressed as "section.key".
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse(const std::string& text) {
        ConfigFile cfg;
        std::string section;
        int line_no = 0;
        for (auto& raw : split_lines(text)) {
            ++line_no;
            std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error("config line " + std::to_string(line_no) +
                                             ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            size_t hash = value.find(" #");
            if (hash != std::string::npos && value.find('"') == std::string::npos)
                value = trim(value.substr(0, hash));
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse(buffer.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : std::stoi(it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : std::stod(it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return it->second == "true" || it->second == "1" || it->second == "yes";
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace proofpilot::support
