#include "codecomp/report.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace codecomp {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Report& Report::add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
    return *this;
}

Report& Report::add(std::string key, double value) { return add(std::move(key), format_double(value)); }

Report& Report::add(std::string key, std::uint64_t value) { return add(std::move(key), std::to_string(value)); }

Report& Report::note(std::string text) {
    notes_.push_back(std::move(text));
    return *this;
}

std::string Report::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return {};
}

std::string Report::text() const {
    std::ostringstream os;
    if (!title_.empty()) os << title_ << '\n';
    std::size_t width = 0;
    for (const auto& [k, v] : entries_) width = std::max(width, k.size());
    for (const auto& [k, v] : entries_) {
        os << "  " << k << std::string(width - k.size(), ' ') << "  " << v << '\n';
    }
    for (const auto& n : notes_) os << "note: " << n << '\n';
    return os.str();
}

std::string Report::tsv() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries_) os << k << '\t' << v << '\n';
    return os.str();
}

} // namespace codecomp
