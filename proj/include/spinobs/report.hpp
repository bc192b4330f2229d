#pragma once

#include <map>
#include <string>
#include <vector>

#include "spinobs/rational.hpp"

namespace spinobs {

// CSV with a mandatory header row; rationals as "p/q", reals with 17
// significant digits.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> cells);
    std::string str() const;
    static std::string cell(const Rat& x) { return to_string(x); }
    static std::string cell(double x) { return format_real(x); }
    static std::string cell(long long x) { return std::to_string(x); }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Structured key=value experiment config; unknown keys are rejected by the
// consumer via `take`-style access tracking.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;                       // throws if missing
    std::string get_or(const std::string& key, const std::string& dflt) const;
    Rat get_rational(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;

    // every key must have been read through one of the getters above
    void reject_unknown_keys() const;
    std::string serialize() const;  // normalized, replayable form

  private:
    std::string origin_;
    std::vector<std::pair<std::string, std::string>> entries_;  // insertion order
    mutable std::map<std::string, int> line_of_;
    mutable std::map<std::string, bool> touched_;
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const;
};

// Write-to-temp-then-rename.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace spinobs
