#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace codecomp {

/// Ordered key/value report, rendered either as aligned text for people or
/// as `key<TAB>value` lines for scripts. Notes appear only in the text form.
class Report {
public:
    explicit Report(std::string title = {}) : title_(std::move(title)) {}

    Report& add(std::string key, std::string value);
    Report& add(std::string key, double value);
    Report& add(std::string key, std::uint64_t value);
    Report& add(std::string key, std::int64_t value) { return add(std::move(key), std::to_string(value)); }
    Report& add(std::string key, std::uint32_t value) { return add(std::move(key), std::uint64_t{value}); }
    Report& add(std::string key, int value) { return add(std::move(key), std::to_string(value)); }
    Report& note(std::string text);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    /// Value for `key`, or empty if absent.
    std::string get(const std::string& key) const;

    std::string text() const;
    std::string tsv() const;

private:
    std::string title_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::string> notes_;
};

/// Shortest round-trip decimal form.
std::string format_double(double v);

} // namespace codecomp
