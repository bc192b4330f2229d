#include "spinobs/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinobs/errors.hpp"

namespace spinobs {

void CsvWriter::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw ValidationError("CSV row width does not match header");
    rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
    std::ostringstream o;
    for (size_t i = 0; i < header_.size(); ++i) o << (i ? "," : "") << header_[i];
    o << "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) o << (i ? "," : "") << row[i];
        o << "\n";
    }
    return o.str();
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto notspace = line.find_first_not_of(" \t\r\n");
        if (notspace == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected key=value, got '" + line + "'");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\n");
            auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (cfg.line_of_.count(key))
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
        cfg.entries_.push_back({key, value});
        cfg.line_of_[key] = lineno;
        cfg.touched_[key] = false;
    }
    return cfg;
}

void KeyValueConfig::fail(const std::string& key, const std::string& msg) const {
    auto it = line_of_.find(key);
    std::string loc = origin_;
    if (it != line_of_.end()) loc += ":" + std::to_string(it->second);
    throw ValidationError(loc + ": " + msg);
}

bool KeyValueConfig::has(const std::string& key) const {
    if (line_of_.count(key)) {
        touched_[key] = true;
        return true;
    }
    return false;
}

std::string KeyValueConfig::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) {
            touched_[key] = true;
            return v;
        }
    throw ValidationError(origin_ + ": missing required key '" + key + "'");
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& dflt) const {
    if (line_of_.count(key)) return get(key);
    return dflt;
}

Rat KeyValueConfig::get_rational(const std::string& key) const {
    std::string s = get(key);
    auto r = try_parse_rational(s);
    if (!r) fail(key, "malformed rational '" + s + "' for key '" + key + "'");
    return *r;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    std::string s = get(key);
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trail");
        return v;
    } catch (...) {
        fail(key, "malformed integer '" + s + "' for key '" + key + "'");
    }
}

double KeyValueConfig::get_real(const std::string& key) const {
    std::string s = get(key);
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trail");
        return v;
    } catch (...) {
        fail(key, "malformed real '" + s + "' for key '" + key + "'");
    }
}

void KeyValueConfig::reject_unknown_keys() const {
    for (const auto& [k, v] : entries_)
        if (!touched_.at(k)) fail(k, "unknown key '" + k + "'");
}

std::string KeyValueConfig::serialize() const {
    std::ostringstream o;
    for (const auto& [k, v] : entries_) o << k << "=" << v << "\n";
    return o.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write file: " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ValidationError("cannot rename " + tmp + " to " + path);
}

}  // namespace spinobs
