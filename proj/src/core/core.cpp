#include "sprobe/core.hpp"

#include <cmath>
#include <sstream>

#include "sprobe/error.hpp"

namespace sprobe {

void validate(const StormRecord& r) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("record " + r.storm_id + " @ " + format_iso8601(r.timestamp) + ": " + what);
    };
    if (r.storm_id.empty()) fail("empty storm_id");
    if (!std::isfinite(r.lat) || r.lat < -90.0 || r.lat > 90.0) fail("lat out of [-90, 90]");
    if (!std::isfinite(r.lon) || r.lon < -180.0 || r.lon >= 180.0) fail("lon out of [-180, 180)");
    if (!std::isfinite(r.pressure_hpa) || r.pressure_hpa < kMinPressureHpa || r.pressure_hpa > kMaxPressureHpa)
        fail("pressure_hpa out of [850, 1050]");
    if (!std::isfinite(r.wind_kt) || r.wind_kt < 0.0) fail("wind_kt negative or non-finite");
    if (!on_three_hour_grid(r.timestamp)) fail("timestamp not on the 3-hour grid");
}

void validate(const Trajectory& t) {
    for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        if (r.storm_id != t.storm_id)
            throw ValidationError("trajectory " + t.storm_id + ": record " + std::to_string(i) +
                                  " belongs to " + r.storm_id);
        validate(r);
        if (i > 0 && r.timestamp - t.records[i - 1].timestamp != kThreeHours)
            throw ValidationError("trajectory " + t.storm_id + ": spacing at record " + std::to_string(i) +
                                  " is not 3 hours");
    }
}

double canonical_lon(double lon) {
    if (lon >= -180.0 && lon < 180.0) return lon;
    double x = std::fmod(lon + 180.0, 360.0);
    if (x < 0.0) x += 360.0;
    x -= 180.0;
    // fmod can round up to exactly 180 for inputs just below it
    if (x >= 180.0) x -= 360.0;
    return x;
}

std::string_view to_string(Regime r) { return r == Regime::Intense ? "Intense" : "Moderate"; }

std::string_view to_string(Aggregation a) { return a == Aggregation::Cls ? "cls" : "spatial_mean"; }

Aggregation parse_aggregation(std::string_view s) {
    if (s == "cls") return Aggregation::Cls;
    if (s == "spatial_mean") return Aggregation::SpatialMean;
    throw ValidationError("unknown aggregation '" + std::string(s) + "'");
}

void validate(const FeatureStore& s) {
    if (s.meta.size() != s.rows())
        throw ValidationError("feature store has " + std::to_string(s.rows()) + " feature rows but " +
                              std::to_string(s.meta.size()) + " metadata rows");
    for (Eigen::Index i = 0; i < s.features.rows(); ++i)
        for (Eigen::Index j = 0; j < s.features.cols(); ++j)
            if (!std::isfinite(s.features(i, j))) {
                std::ostringstream os;
                os << "non-finite at (" << i << "," << j << ")";
                throw ValidationError(os.str());
            }
}

SplitSide SplitAssignment::at(const std::string& storm_id) const {
    auto it = side.find(storm_id);
    if (it == side.end()) throw ValidationError("storm " + storm_id + " missing from split assignment");
    return it->second;
}

std::size_t SplitAssignment::count(SplitSide s) const {
    std::size_t n = 0;
    for (const auto& [id, v] : side) n += (v == s);
    return n;
}

std::string_view to_string(SplitPolicy p) {
    return p == SplitPolicy::TrajectoryFraction ? "trajectory_fraction" : "agency_holdout";
}

}  // namespace sprobe
