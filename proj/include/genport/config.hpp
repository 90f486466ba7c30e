#pragma once

#include <map>
#include <string>
#include <vector>

namespace genport {

// Minimal TOML-style config: [section] headers, key = value pairs with
// strings, numbers, booleans and flat arrays. Comments start with '#'.
struct ConfigValue {
    enum class Kind { String, Number, Boolean, List };
    Kind kind = Kind::String;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<ConfigValue> list;
};

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;

    std::string str(const std::string& section, const std::string& key) const;
    std::string str_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double num(const std::string& section, const std::string& key) const;
    double num_or(const std::string& section, const std::string& key, double fallback) const;
    long long int_or(const std::string& section, const std::string& key,
                     long long fallback) const;
    bool bool_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<std::string> str_list(const std::string& section, const std::string& key) const;
    std::vector<double> num_list(const std::string& section, const std::string& key) const;

    // canonical form sorts sections and keys, so the hash is stable under
    // reordering of the source file
    std::string canonical() const;
    std::string hash() const;  // 64-bit FNV-1a, hex

    const std::map<std::string, std::map<std::string, ConfigValue>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, ConfigValue>> sections_;
};

}  // namespace genport
