#include "codecomp/binary_io.hpp"

#include <fstream>
#include <limits>

namespace codecomp {

void ByteWriter::string(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("string too long to serialize");
    }
    u32(static_cast<std::uint32_t>(s.size()));
    for (char c : s) out_.push_back(static_cast<std::uint8_t>(c));
}

void ByteReader::fail(const std::string& msg) const {
    throw DataError(what_ + ": " + msg + " at byte offset " + std::to_string(pos_));
}

void ByteReader::need(std::size_t n, std::string_view field) const {
    if (remaining() < n) {
        fail("truncated reading " + std::string(field) + ": need " + std::to_string(n) +
             " bytes, " + std::to_string(remaining()) + " available");
    }
}

void ByteReader::expect_magic(std::string_view tag) {
    need(tag.size(), "magic");
    for (std::size_t i = 0; i < tag.size(); ++i) {
        if (data_[pos_ + i] != static_cast<std::uint8_t>(tag[i])) {
            fail("bad magic, expected \"" + std::string(tag) + "\"");
        }
    }
    pos_ += tag.size();
}

std::uint8_t ByteReader::u8(std::string_view field) {
    need(1, field);
    return data_[pos_++];
}

std::uint32_t ByteReader::u32(std::string_view field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64(std::string_view field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

void ByteReader::f32s(std::span<float> dst, std::string_view field) {
    const std::size_t bytes = dst.size() * 4;
    if (remaining() < bytes) {
        fail("truncated " + std::string(field) + ": expected " + std::to_string(bytes) +
             " bytes, got " + std::to_string(remaining()));
    }
    for (float& f : dst) f = f32(field);
}

std::string ByteReader::string(std::string_view field) {
    const std::uint32_t n = u32(field);
    need(n, field);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n, std::string_view field) {
    need(n, field);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
}

void ByteReader::expect_end() {
    if (remaining() != 0) fail(std::to_string(remaining()) + " trailing bytes");
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw DataError("read failed: " + path.string());
    return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace codecomp
