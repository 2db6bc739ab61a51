#include <cstring>
#include <map>

#include <doctest.h>
#include <json.hpp>

#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/store.hpp"

using namespace sprobe;
using namespace sprobe::pipeline;

namespace {

const std::filesystem::path kData = SPROBE_GOLDEN_DIR;

template <class T>
void append(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

std::string as_bytes(const std::vector<float>& v) {
    return std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
}

}  // namespace

TEST_CASE("golden: crop extraction with wraparound, padding and latitude bounds") {
    const auto cases = nlohmann::json::parse(read_file(kData / "crops.json"));
    const std::string expected = read_file(kData / "crops.f32");
    const std::size_t frame_bytes = kCropSize * kCropSize * sizeof(float);
    std::map<std::string, GridFrame> grids;
    std::size_t offset = 0;
    for (const auto& c : cases) {
        const std::string name = c["grid"];
        if (!grids.count(name)) grids[name] = read_grid(kData / name, "irwin_cdr");
        const auto w = extract_crop(grids[name], c["lat"].get<double>(), c["lon"].get<double>());
        CAPTURE(name);
        CAPTURE(c["lat"].get<double>());
        CAPTURE(c["lon"].get<double>());
        REQUIRE(w.discard_reason == c["discard_reason"].get<std::string>());
        if (!w.discard_reason.empty()) continue;
        REQUIRE(offset + frame_bytes <= expected.size());
        CHECK(as_bytes(w.values) == expected.substr(offset, frame_bytes));
        offset += frame_bytes;
    }
    CHECK(offset == expected.size());
}

TEST_CASE("golden: quality masking fills invalid pixels with the fill temperature") {
    const auto meta = nlohmann::json::parse(read_file(kData / "quality.json"));
    const std::string in = read_file(kData / "quality_in.f32");
    REQUIRE(in.size() == kCropSize * kCropSize * sizeof(float));
    std::vector<float> window(kCropSize * kCropSize);
    std::memcpy(window.data(), in.data(), in.size());
    QualityConfig q;
    CHECK(q.fill_kelvin == meta["fill_kelvin"].get<double>());
    CHECK(q.min_kelvin == meta["min_kelvin"].get<double>());
    CHECK(q.max_kelvin == meta["max_kelvin"].get<double>());
    const auto out = quality_check(std::move(window), q);
    REQUIRE(out.status == CropStatus::Kept);
    CHECK(out.fill_count == meta["fill_count"].get<std::size_t>());
    CHECK(as_bytes(out.values) == read_file(kData / "quality_out.f32"));
}

TEST_CASE("golden: 3-hour resampling of irregular tracks") {
    const auto rows = read_tracks_csv(kData / "tracks_in.csv");
    std::map<std::string, std::vector<RawTrackRow>> by_storm;
    for (const auto& r : rows) by_storm[r.storm_id].push_back(r);
    const auto summary = nlohmann::json::parse(read_file(kData / "tracks_clean.json"));
    REQUIRE(summary.size() == by_storm.size());
    std::string packed;
    std::size_t k = 0;
    for (const auto& [id, storm_rows] : by_storm) {
        const auto res = clean_track(storm_rows);
        REQUIRE(res.track);
        CHECK(id == summary[k]["storm_id"].get<std::string>());
        CHECK(res.track->records.size() == summary[k]["records"].get<std::size_t>());
        ++k;
        for (const auto& r : res.track->records) {
            append<std::int64_t>(packed, r.timestamp);
            append(packed, r.lat);
            append(packed, r.lon);
            append(packed, r.pressure_hpa);
            append(packed, r.wind_kt);
        }
    }
    CHECK(packed == read_file(kData / "tracks_clean.bin"));
}

TEST_CASE("golden: NetCDF4 grid with packed values and fill") {
    if (!netcdf_supported()) {
        CHECK_THROWS_AS(read_grid(kData / "gridsat_small.nc", "irwin_cdr"), FormatError);
        return;
    }
    const auto g = read_grid(kData / "gridsat_small.nc", "irwin_cdr");
    CHECK(g.timestamp == 946684800 + 36 * 3600);
    CHECK(read_grid_timestamp(kData / "gridsat_small.nc", "irwin_cdr") == g.timestamp);
    REQUIRE(g.nlat() == 20);
    REQUIRE(g.nlon() == 30);
    CHECK(g.lat.front() == doctest::Approx(-10.0));
    CHECK(g.lon.back() == doctest::Approx(150.0 + 0.07 * 29));
    CHECK(as_bytes(g.values) == read_file(kData / "gridsat_small.f32"));
    CHECK_THROWS_AS(read_grid(kData / "gridsat_small.nc", "no_such_variable"), FormatError);
}
