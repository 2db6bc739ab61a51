#include <cmath>
#include <limits>

#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/store.hpp"

namespace sprobe::pipeline {

Window extract_crop(const GridFrame& g, double lat, double lon) {
    if (g.nlat() < 2 || g.nlon() < 2 || g.values.size() != g.nlat() * g.nlon())
        throw ValidationError("extract_crop: malformed grid");
    if (!std::isfinite(lat) || !std::isfinite(lon)) throw ValidationError("extract_crop: non-finite center");
    const auto nlat = static_cast<long long>(g.nlat());
    const auto nlon = static_cast<long long>(g.nlon());
    const auto half = static_cast<long long>(kCropHalf);
    const auto size = static_cast<long long>(kCropSize);

    // Rows are addressed north-up: row 0 is the northernmost grid line.
    const double dlat = g.lat[1] - g.lat[0];
    const bool descending = dlat < 0.0;
    const long long north_index = descending ? std::llround((g.lat[0] - lat) / -dlat)
                                             : nlat - 1 - std::llround((lat - g.lat[0]) / dlat);
    auto grid_row = [&](long long north_row) { return descending ? north_row : nlat - 1 - north_row; };

    const double dlon = g.lon[1] - g.lon[0];
    const bool full_circle = std::abs(dlon * static_cast<double>(nlon) - 360.0) <= 1e-6;
    long long col;
    if (full_circle) {
        double x = std::fmod(lon - g.lon[0], 360.0);
        if (x < 0.0) x += 360.0;
        col = std::llround(x / dlon) % nlon;
    } else {
        // Pick the longitude representative nearest the middle of a regional grid.
        const double mid = 0.5 * (g.lon.front() + g.lon.back());
        const double x = lon - 360.0 * std::round((lon - mid) / 360.0);
        col = std::llround((x - g.lon[0]) / dlon);
    }

    Window w;
    w.center_col = static_cast<std::size_t>(((col % nlon) + nlon) % nlon);
    if (north_index - half < 0 || north_index + half - 1 >= nlat) {
        w.discard_reason = "lat_bounds";
        return w;
    }
    w.center_row = static_cast<std::size_t>(grid_row(north_index));
    w.values.resize(kCropSize * kCropSize);
    for (long long r = 0; r < size; ++r) {
        const long long gi = grid_row(north_index - half + r);
        const float* src = g.values.data() + gi * nlon;
        float* dst = w.values.data() + r * size;
        for (long long c = 0; c < size; ++c) {
            long long j = col - half + c;
            if (full_circle) {
                j %= nlon;
                if (j < 0) j += nlon;
                dst[c] = src[j];
            } else {
                dst[c] = (j >= 0 && j < nlon) ? src[j] : std::numeric_limits<float>::quiet_NaN();
            }
        }
    }
    return w;
}

nlohmann::json to_json(const QualityConfig& q) {
    return {{"min_kelvin", q.min_kelvin},
            {"max_kelvin", q.max_kelvin},
            {"fill_kelvin", q.fill_kelvin},
            {"max_invalid_fraction", q.max_invalid_fraction},
            {"protected_size", q.protected_size}};
}

CropFrame quality_check(std::vector<float> window, const QualityConfig& q) {
    if (window.size() != kCropSize * kCropSize)
        throw ValidationError("quality_check: window must be 224x224, got " + std::to_string(window.size()) + " pixels");
    if (q.protected_size > kCropSize) throw ValidationError("quality_check: protected block larger than the crop");
    auto invalid = [&](float v) { return std::isnan(v) || v < q.min_kelvin || v > q.max_kelvin; };

    std::size_t bad = 0;
    for (float v : window) bad += invalid(v) ? 1 : 0;
    CropFrame out;
    if (static_cast<double>(bad) > q.max_invalid_fraction * static_cast<double>(window.size())) {
        out.status = CropStatus::Discarded;
        out.reason = "invalid_fraction";
        return out;
    }
    const std::size_t lo = kCropHalf - q.protected_size / 2;
    const std::size_t hi = lo + q.protected_size;
    for (std::size_t r = lo; r < hi; ++r)
        for (std::size_t c = lo; c < hi; ++c)
            if (invalid(window[r * kCropSize + c])) {
                out.status = CropStatus::Discarded;
                out.reason = "center_invalid";
                return out;
            }
    for (float& v : window)
        if (invalid(v)) {
            v = static_cast<float>(q.fill_kelvin);
            ++out.fill_count;
        }
    out.values = std::move(window);
    out.status = CropStatus::Kept;
    return out;
}

}  // namespace sprobe::pipeline
