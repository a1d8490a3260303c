#include "codecomp/checkpoint.hpp"

namespace codecomp {

namespace {
constexpr std::string_view kMagic = "DCLM";
constexpr std::uint8_t kVersion = 1;
} // namespace

Bytes encode_checkpoint(const Checkpoint& ckpt) {
    ckpt.scheme.validate();
    check_shapes(ckpt.params, ckpt.scheme);
    ByteWriter w;
    w.magic(kMagic);
    w.u8(kVersion);
    w.u32(ckpt.scheme.M);
    w.u32(ckpt.scheme.K);
    w.u32(ckpt.scheme.H);
    for (const auto* g : ckpt.params.groups()) w.f32s({g->data(), static_cast<std::size_t>(g->size())});
    w.u64(ckpt.iteration);
    return w.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> data, const std::string& what) {
    ByteReader r(data, what);
    r.expect_magic(kMagic);
    const auto version = r.u8("version");
    if (version != kVersion) r.fail("unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    ckpt.scheme.M = r.u32("M");
    ckpt.scheme.K = r.u32("K");
    ckpt.scheme.H = r.u32("H");
    try {
        ckpt.scheme.validate();
    } catch (const ConfigError& e) {
        r.fail(e.what());
    }
    ckpt.params = ModelParams<float>::zeros(ckpt.scheme);
    auto groups = ckpt.params.groups();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        r.f32s({groups[g]->data(), static_cast<std::size_t>(groups[g]->size())},
               ModelParams<float>::kGroupNames[g]);
        if (!groups[g]->allFinite()) {
            r.fail("non-finite value in " + std::string(ModelParams<float>::kGroupNames[g]));
        }
    }
    ckpt.iteration = r.u64("iteration");
    r.expect_end();
    return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path), path.string());
}

} // namespace codecomp
