#pragma once

// Just enough TOML for profile files: [table], [[array.of.tables]],
// key = string | number | bool | flat array, and # comments.
// Parsed into nlohmann::json so the rest of the code has one tree type.

#include <cctype>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "errors.hpp"

namespace confine::toml_lite {

using json = nlohmann::json;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// drop a trailing comment, respecting quoted strings
inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

[[noreturn]] inline void fail(int line, const std::string& msg) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

inline json parse_value(const std::string& raw, int line) {
    const std::string v = trim(raw);
    if (v.empty()) fail(line, "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                const char c = v[++i];
                out += c == 'n' ? '\n' : c == 't' ? '\t' : c;
            } else {
                out += v[i];
            }
        }
        return out;
    }
    if (v.front() == '[') {
        if (v.back() != ']') fail(line, "unterminated array");
        json arr = json::array();
        const std::string body = v.substr(1, v.size() - 2);
        std::string item;
        bool quoted = false;
        for (char c : body) {
            if (c == '"') quoted = !quoted;
            if (c == ',' && !quoted) {
                if (!trim(item).empty()) arr.push_back(parse_value(item, line));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!trim(item).empty()) arr.push_back(parse_value(item, line));
        return arr;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    std::string num;
    for (char c : v)
        if (c != '_') num += c;
    try {
        std::size_t used = 0;
        const bool integral = num.find_first_of(".eE") == std::string::npos;
        if (integral) {
            const long long i = std::stoll(num, &used);
            if (used == num.size()) return i;
        } else {
            const double d = std::stod(num, &used);
            if (used == num.size()) return d;
        }
    } catch (const std::exception&) {
    }
    fail(line, "cannot parse value '" + v + "'");
}

inline json& descend(json& root, const std::string& dotted, int line) {
    json* node = &root;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        part = trim(part);
        if (part.empty()) fail(line, "empty table name");
        json& next = (*node)[part];
        if (next.is_null()) next = json::object();
        node = next.is_array() ? &next.back() : &next;
        if (!node->is_object()) fail(line, "'" + part + "' is not a table");
    }
    return *node;
}

}  // namespace detail

inline json parse(std::istream& in) {
    json root = json::object();
    json* current = &root;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = detail::trim(detail::strip_comment(raw));
        if (s.empty()) continue;
        if (s.rfind("[[", 0) == 0) {
            if (s.size() < 4 || s.substr(s.size() - 2) != "]]") detail::fail(line, "bad array-of-tables header");
            const std::string name = detail::trim(s.substr(2, s.size() - 4));
            const auto dot = name.rfind('.');
            json& parent = dot == std::string::npos ? root : detail::descend(root, name.substr(0, dot), line);
            const std::string leaf = dot == std::string::npos ? name : detail::trim(name.substr(dot + 1));
            json& arr = parent[leaf];
            if (arr.is_null()) arr = json::array();
            if (!arr.is_array()) detail::fail(line, "'" + leaf + "' is not an array of tables");
            arr.push_back(json::object());
            current = &arr.back();
        } else if (s.front() == '[') {
            if (s.back() != ']') detail::fail(line, "bad table header");
            current = &detail::descend(root, s.substr(1, s.size() - 2), line);
        } else {
            const auto eq = s.find('=');
            if (eq == std::string::npos) detail::fail(line, "expected key = value");
            std::string key = detail::trim(s.substr(0, eq));
            if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
            if (key.empty()) detail::fail(line, "empty key");
            if (current->contains(key)) detail::fail(line, "duplicate key '" + key + "'");
            (*current)[key] = detail::parse_value(s.substr(eq + 1), line);
        }
    }
    return root;
}

inline json parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return parse(in);
}

}  // namespace confine::toml_lite
