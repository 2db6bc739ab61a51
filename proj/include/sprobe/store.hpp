#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sprobe/core.hpp"

namespace sprobe {

// TCFS: "TCFS" | u32 version=1 | u64 n | u32 d | u8 dtype=0 | 3 zero bytes | n*d f32, all LE.
inline constexpr std::size_t kFeatureHeaderBytes = 24;
// TCIM: "TCIM" | u32 version=1 | u64 n | u32 h=224 | u32 w=224 | u8 dtype=0 | 3 zero bytes | frames.
inline constexpr std::size_t kImageHeaderBytes = 28;
inline constexpr std::size_t kCropSize = 224;

inline constexpr std::string_view kMetaHeader =
    "row,storm_id,agency,timestamp,lat,lon,pressure_hpa,wind_kt";

std::filesystem::path meta_path(const std::filesystem::path& store);
std::filesystem::path store_manifest_path(const std::filesystem::path& store);

void write_feature_store(const FeatureStore& store, const std::filesystem::path& path);
FeatureStore read_feature_store(const std::filesystem::path& path);

/// 224x224 Kelvin frames, row-major, with aligned metadata.
struct ImageStore {
    std::vector<float> pixels;
    std::vector<StormRecord> meta;

    std::size_t frames() const { return meta.size(); }
    std::span<const float> frame(std::size_t i) const {
        return {pixels.data() + i * kCropSize * kCropSize, kCropSize * kCropSize};
    }
};

void write_image_store(const ImageStore& store, const std::filesystem::path& path);
ImageStore read_image_store(const std::filesystem::path& path);

std::string format_meta_csv(const std::vector<StormRecord>& rows);
std::vector<StormRecord> parse_meta_csv(std::string_view text, const std::string& origin);

/// "sha256:<hex>" of the given bytes.
std::string sha256_digest(std::span<const unsigned char> bytes);
std::string file_digest(const std::filesystem::path& path);
/// Digest of a store: binary file bytes followed by its metadata sidecar bytes.
std::string store_digest(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Write-then-rename so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace sprobe
