#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Core>

#include "sprobe/core.hpp"
#include "sprobe/rng.hpp"

namespace sprobe::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("sprobe-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// `n_storms` storms of `steps` 3-hourly records whose pressure sweeps from
/// `p_start` by `p_step` per record; all fields valid.
inline std::vector<StormRecord> sweep_records(std::size_t n_storms, std::size_t steps, double p_start,
                                              double p_step, std::uint64_t seed = 0) {
    Rng rng(seed);
    std::vector<StormRecord> out;
    for (std::size_t s = 0; s < n_storms; ++s) {
        const double offset = rng.uniform(-20.0, 20.0);
        const double lat = rng.uniform(5.0, 35.0);
        for (std::size_t k = 0; k < steps; ++k) {
            StormRecord r;
            r.storm_id = "S" + std::to_string(1000 + s);
            r.agency = s % 2 ? "hurdat_atl" : "jtwc_wp";
            r.timestamp = 946684800 + static_cast<UnixSeconds>(s) * 86400 + static_cast<UnixSeconds>(k) * kThreeHours;
            r.lat = lat + 0.1 * static_cast<double>(k);
            r.lon = -60.0 - 0.2 * static_cast<double>(k);
            r.pressure_hpa = std::clamp(p_start + offset + p_step * static_cast<double>(k), 880.0, 1020.0);
            r.wind_kt = 20.0 + (1010.0 - r.pressure_hpa) * 0.8;
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace sprobe::test

namespace sprobe::test {

/// Storms whose first `half` records are Moderate and last `half` Intense, so any
/// storm-level split is already regime-balanced. Latitudes alternate between a
/// low (< 15 deg) and a high (> 25 deg) band per storm.
inline std::vector<StormRecord> balanced_records(std::size_t n_storms, std::size_t half, std::uint64_t seed = 0) {
    Rng rng(seed);
    std::vector<StormRecord> out;
    for (std::size_t s = 0; s < n_storms; ++s) {
        const double lat = s % 2 ? rng.uniform(27.0, 35.0) : rng.uniform(6.0, 13.0);
        const double jitter = rng.uniform(0.0, 4.0);
        for (std::size_t k = 0; k < 2 * half; ++k) {
            StormRecord r;
            r.storm_id = "B" + std::to_string(100 + s);
            r.agency = s % 3 == 0 ? "hurdat_epa" : "hurdat_atl";
            r.timestamp = 946684800 + static_cast<UnixSeconds>(s) * 86400 * 3 + static_cast<UnixSeconds>(k) * kThreeHours;
            r.lat = lat;
            r.lon = -70.0 + 0.3 * static_cast<double>(k);
            r.pressure_hpa = k < half ? 982.0 + jitter + 2.5 * static_cast<double>(half - k)
                                      : 978.0 - jitter - 3.5 * static_cast<double>(k - half);
            r.wind_kt = 25.0 + 0.9 * (1010.0 - r.pressure_hpa) + (s % 2 ? 0.0 : 12.0);
            // Dyadic values keep exact linear encodings exact in float32.
            r.pressure_hpa = std::round(r.pressure_hpa * 64.0) / 64.0;
            r.wind_kt = std::round(r.wind_kt * 64.0) / 64.0;
            out.push_back(r);
        }
    }
    return out;
}

/// Store whose row i is `fn(meta[i], rng)`.
template <class Fn>
FeatureStore make_store(std::vector<StormRecord> meta, std::size_t dim, Fn fn, std::uint64_t seed = 0) {
    FeatureStore s;
    s.meta = std::move(meta);
    s.features.resize(static_cast<Eigen::Index>(s.meta.size()), static_cast<Eigen::Index>(dim));
    Rng rng(seed);
    for (std::size_t i = 0; i < s.meta.size(); ++i) {
        const Eigen::VectorXd z = fn(s.meta[i], rng);
        s.features.row(static_cast<Eigen::Index>(i)) = z.cast<float>().transpose();
    }
    return s;
}

}  // namespace sprobe::test
