#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "codecomp/binary_io.hpp"
#include "codecomp/code_model.hpp"

namespace codecomp {

struct Checkpoint {
    SchemeConfig scheme;  // tau is not stored; loads as 1.0
    ModelParams<float> params;
    std::uint64_t iteration = 0;
};

/// "DCLM", u8 version 1, u32 M, u32 K, u32 H, then theta, b, theta_prime,
/// b_prime, A as f32 row-major, then u64 iteration. Little-endian.
Bytes encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> data, const std::string& what = "checkpoint");

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace codecomp
