#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprobe/core.hpp"

namespace sprobe::pipeline {

// ---- tracks ---------------------------------------------------------------

inline constexpr std::string_view kTracksHeader = "storm_id,agency,timestamp_iso8601,lat,lon,pressure_hpa,wind_kt";

struct RawTrackRow {
    std::string storm_id;
    std::string agency;
    UnixSeconds timestamp = 0;
    double lat = 0.0;
    double lon = 0.0;
    std::optional<double> pressure_hpa;
    std::optional<double> wind_kt;
    bool operator==(const RawTrackRow&) const = default;
};

/// Empty pressure/wind fields mean "missing". Throws FormatError with line context.
std::vector<RawTrackRow> parse_tracks_csv(std::string_view text, const std::string& origin);
std::vector<RawTrackRow> read_tracks_csv(const std::filesystem::path& path);
std::string format_tracks_csv(const std::vector<RawTrackRow>& rows);
std::string format_tracks_csv(const std::vector<Trajectory>& storms);

std::vector<RawTrackRow> to_raw(const Trajectory& t);

struct CleanResult {
    std::optional<Trajectory> track;
    std::string drop_reason;  // set when track is empty
};

/// Trim to the window where both pressure and wind are reported, then resample on
/// the 3-hour UTC grid by linear interpolation in time (longitude along the shorter arc).
/// Rows must belong to one storm and be sorted by time.
CleanResult clean_track(const std::vector<RawTrackRow>& rows);
CleanResult clean_track(const Trajectory& t);

// ---- gridded brightness temperature ---------------------------------------

/// Plate Carree frame; values are lat-major (nlat x nlon), NaN marks missing pixels.
struct GridFrame {
    UnixSeconds timestamp = 0;
    std::vector<double> lat;
    std::vector<double> lon;
    std::vector<float> values;

    std::size_t nlat() const { return lat.size(); }
    std::size_t nlon() const { return lon.size(); }
    float at(std::size_t i, std::size_t j) const { return values[i * lon.size() + j]; }
};

/// Uniform axes (to 1e-9 degrees), latitudes within [-90, 90], payload size nlat*nlon.
void validate(const GridFrame& g);

/// Uniform grid helper: axis k is first + k*step.
std::vector<double> uniform_axis(double first, double step, std::size_t n);

// Raw fallback layout "TCGR": magic | u32 version=1 | i64 timestamp | u32 nlat | u32 nlon |
// u8 dtype=0 | 3 zero bytes | f64 lat[nlat] | f64 lon[nlon] | f32 values[nlat*nlon], all LE.
inline constexpr std::size_t kGridHeaderBytes = 28;
std::string encode_raw_grid(const GridFrame& g);
GridFrame decode_raw_grid(std::string_view bytes, const std::string& origin);
void write_raw_grid(const GridFrame& g, const std::filesystem::path& path);

/// NetCDF4 file with `lat`, `lon`, `time` and a (time, lat, lon) brightness variable
/// honoring scale_factor, add_offset and _FillValue. Throws FormatError when the
/// library was built without HDF5.
GridFrame read_netcdf_grid(const std::filesystem::path& path, const std::string& variable);
bool netcdf_supported();

/// Dispatches on the file signature (raw fallback or NetCDF4/HDF5).
GridFrame read_grid(const std::filesystem::path& path, const std::string& variable);
/// Only the timestamp, without loading the payload.
UnixSeconds read_grid_timestamp(const std::filesystem::path& path, const std::string& variable);

// ---- crops ----------------------------------------------------------------

inline constexpr std::size_t kCropHalf = 112;

struct Window {
    std::vector<float> values;  // 224 x 224, north-up, empty when discarded
    std::size_t center_row = 0;  // grid indices of the center pixel
    std::size_t center_col = 0;
    std::string discard_reason;  // "lat_bounds" or empty
};

/// 224x224 window around the nearest grid pixel; longitude wraps when the axis spans
/// the full circle (pixels beyond a regional axis are missing); latitude never wraps.
Window extract_crop(const GridFrame& g, double lat, double lon);

struct QualityConfig {
    double min_kelvin = 140.0;
    double max_kelvin = 375.0;
    double fill_kelvin = 200.0;
    double max_invalid_fraction = 0.05;
    std::size_t protected_size = 32;  // central block that must be fully valid
};

nlohmann::json to_json(const QualityConfig& q);

enum class CropStatus { Kept, Discarded };

struct CropFrame {
    std::vector<float> values;
    std::string storm_id;
    UnixSeconds timestamp = 0;
    double center_lat = 0.0;
    double center_lon = 0.0;
    std::size_t fill_count = 0;
    CropStatus status = CropStatus::Kept;
    std::string reason;  // "invalid_fraction" / "center_invalid" when discarded
};

/// Invalid pixels are NaN or outside [min, max] Kelvin. Discard when the invalid
/// fraction exceeds the limit or the protected center has any; otherwise fill.
CropFrame quality_check(std::vector<float> window, const QualityConfig& q = {});

// ---- dataset assembly ------------------------------------------------------

struct BuildConfig {
    QualityConfig quality;
    double match_tolerance_hours = 1.5;
    std::string variable = "irwin_cdr";
};

nlohmann::json to_json(const BuildConfig& c);

struct BuildResult {
    std::size_t kept = 0;
    std::size_t timesteps = 0;
    std::map<std::string, std::size_t> drop_reasons;        // per timestep
    std::map<std::string, std::size_t> storm_drop_reasons;  // per storm
    nlohmann::json manifest;
};

/// Reads tracks CSV and a directory of grid files, writes the TCIM store at `out`,
/// its metadata sidecar, and `manifest.json` next to it (written last, atomically).
BuildResult build_dataset(const std::filesystem::path& tracks, const std::filesystem::path& grids_dir,
                          const std::filesystem::path& out, const BuildConfig& config = {});

std::filesystem::path build_manifest_path(const std::filesystem::path& out);

}  // namespace sprobe::pipeline
