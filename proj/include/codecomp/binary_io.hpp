#pragma once

// Little-endian byte buffers shared by the checkpoint, code, codebook and
// binary embedding formats.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codecomp/errors.hpp"

namespace codecomp {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
public:
    void magic(std::string_view tag) { for (char c : tag) out_.push_back(static_cast<std::uint8_t>(c)); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f32s(std::span<const float> vs) {
        out_.reserve(out_.size() + 4 * vs.size());
        for (float v : vs) f32(v);
    }
    void string(std::string_view s);
    void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    Bytes& bytes() { return out_; }
    Bytes take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    Bytes out_;
};

/// Bounds-checked reader. Every failure is a DataError naming the byte
/// offset and what was being read.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string what)
        : data_(data), what_(std::move(what)) {}

    void expect_magic(std::string_view tag);
    std::uint8_t u8(std::string_view field);
    std::uint32_t u32(std::string_view field);
    std::uint64_t u64(std::string_view field);
    float f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }
    void f32s(std::span<float> dst, std::string_view field);
    std::string string(std::string_view field);
    std::span<const std::uint8_t> raw(std::size_t n, std::string_view field);

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    void expect_end();

    [[noreturn]] void fail(const std::string& msg) const;

private:
    void need(std::size_t n, std::string_view field) const;
    std::span<const std::uint8_t> data_;
    std::string what_;
    std::size_t pos_ = 0;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace codecomp
