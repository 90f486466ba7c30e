#include "genport/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace genport {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// strips an unquoted trailing comment
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

ConfigValue parse_scalar(const std::string& tok, int line_no) {
    ConfigValue v;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.kind = ConfigValue::Kind::String;
        v.str = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    char* endp = nullptr;
    v.num = std::strtod(tok.c_str(), &endp);
    if (endp && *endp == '\0' && endp != tok.c_str()) {
        v.kind = ConfigValue::Kind::Number;
        return v;
    }
    throw std::runtime_error("config line " + std::to_string(line_no) +
                             ": cannot parse value `" + tok + "`");
}

ConfigValue parse_value(const std::string& raw, int line_no) {
    const std::string s = trim(raw);
    if (s.empty())
        throw std::runtime_error("config line " + std::to_string(line_no) + ": empty value");
    if (s.front() == '[') {
        if (s.back() != ']')
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": unterminated array");
        ConfigValue v;
        v.kind = ConfigValue::Kind::List;
        std::string body = s.substr(1, s.size() - 2);
        std::string tok;
        bool in_str = false;
        for (char ch : body) {
            if (ch == '"') in_str = !in_str;
            if (ch == ',' && !in_str) {
                if (!trim(tok).empty()) v.list.push_back(parse_scalar(trim(tok), line_no));
                tok.clear();
            } else {
                tok += ch;
            }
        }
        if (!trim(tok).empty()) v.list.push_back(parse_scalar(trim(tok), line_no));
        return v;
    }
    return parse_scalar(s, line_no);
}

std::string value_repr(const ConfigValue& v) {
    char buf[40];
    switch (v.kind) {
        case ConfigValue::Kind::String:
            return "\"" + v.str + "\"";
        case ConfigValue::Kind::Boolean:
            return v.boolean ? "true" : "false";
        case ConfigValue::Kind::Number:
            std::snprintf(buf, sizeof(buf), "%.17g", v.num);
            return buf;
        case ConfigValue::Kind::List: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.list.size(); ++i) {
                if (i) out += ",";
                out += value_repr(v.list[i]);
            }
            return out + "]";
        }
    }
    return "";
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        cfg.sections_[section][key] = parse_value(line.substr(eq + 1), line_no);
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::str(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config missing [" + section + "] " + key);
    const ConfigValue& v = sections_.at(section).at(key);
    if (v.kind != ConfigValue::Kind::String)
        throw std::runtime_error("config [" + section + "] " + key + " is not a string");
    return v.str;
}

std::string Config::str_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? str(section, key) : fallback;
}

double Config::num(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config missing [" + section + "] " + key);
    const ConfigValue& v = sections_.at(section).at(key);
    if (v.kind != ConfigValue::Kind::Number)
        throw std::runtime_error("config [" + section + "] " + key + " is not a number");
    return v.num;
}

double Config::num_or(const std::string& section, const std::string& key,
                      double fallback) const {
    return has(section, key) ? num(section, key) : fallback;
}

long long Config::int_or(const std::string& section, const std::string& key,
                         long long fallback) const {
    return has(section, key) ? static_cast<long long>(num(section, key)) : fallback;
}

bool Config::bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const ConfigValue& v = sections_.at(section).at(key);
    if (v.kind != ConfigValue::Kind::Boolean)
        throw std::runtime_error("config [" + section + "] " + key + " is not a boolean");
    return v.boolean;
}

std::vector<std::string> Config::str_list(const std::string& section,
                                          const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config missing [" + section + "] " + key);
    const ConfigValue& v = sections_.at(section).at(key);
    std::vector<std::string> out;
    if (v.kind == ConfigValue::Kind::String) {
        out.push_back(v.str);
        return out;
    }
    if (v.kind != ConfigValue::Kind::List)
        throw std::runtime_error("config [" + section + "] " + key + " is not a list");
    for (const auto& e : v.list) {
        if (e.kind != ConfigValue::Kind::String)
            throw std::runtime_error("config [" + section + "] " + key +
                                     " must hold strings");
        out.push_back(e.str);
    }
    return out;
}

std::vector<double> Config::num_list(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw std::runtime_error("config missing [" + section + "] " + key);
    const ConfigValue& v = sections_.at(section).at(key);
    std::vector<double> out;
    if (v.kind == ConfigValue::Kind::Number) {
        out.push_back(v.num);
        return out;
    }
    if (v.kind != ConfigValue::Kind::List)
        throw std::runtime_error("config [" + section + "] " + key + " is not a list");
    for (const auto& e : v.list) {
        if (e.kind != ConfigValue::Kind::Number)
            throw std::runtime_error("config [" + section + "] " + key +
                                     " must hold numbers");
        out.push_back(e.num);
    }
    return out;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [sec, kv] : sections_) {
        for (const auto& [key, val] : kv) {
            out += sec;
            out += '.';
            out += key;
            out += '=';
            out += value_repr(val);
            out += ';';
        }
    }
    return out;
}

std::string Config::hash() const {
    const std::string c = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace genport
