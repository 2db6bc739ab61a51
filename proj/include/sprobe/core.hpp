#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sprobe/timeutil.hpp"

namespace sprobe {

inline constexpr double kRegimeThresholdHpa = 980.0;
inline constexpr double kMinPressureHpa = 850.0;
inline constexpr double kMaxPressureHpa = 1050.0;

/// One best-track timestep: physical state (pressure, wind) plus position.
struct StormRecord {
    std::string storm_id;
    std::string agency;
    UnixSeconds timestamp = 0;
    double lat = 0.0;
    double lon = 0.0;
    double pressure_hpa = 0.0;
    double wind_kt = 0.0;

    bool operator==(const StormRecord&) const = default;
};

/// Throws ValidationError naming the first violated field.
void validate(const StormRecord& r);

struct Trajectory {
    std::string storm_id;
    std::vector<StormRecord> records;

    bool operator==(const Trajectory&) const = default;
};

/// Checks shared storm_id, strictly increasing 3-hour spacing and every record.
void validate(const Trajectory& t);

/// Maps any finite longitude into [-180, 180).
double canonical_lon(double lon);

enum class Regime { Moderate, Intense };

/// Intense iff pressure is strictly below the threshold; the boundary itself is Moderate.
constexpr Regime regime_of(double pressure_hpa, double threshold_hpa = kRegimeThresholdHpa) {
    return pressure_hpa < threshold_hpa ? Regime::Intense : Regime::Moderate;
}

std::string_view to_string(Regime r);

enum class Aggregation { Cls, SpatialMean };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-aligned (features, metadata) pair. Row i of `features` describes `meta[i]`.
struct FeatureStore {
    FeatureMatrix features;
    std::vector<StormRecord> meta;
    Aggregation aggregation = Aggregation::Cls;
    // Filled by read_feature_store; empty for in-memory stores.
    std::string digest;

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

/// Row counts agree and every feature value is finite.
void validate(const FeatureStore& s);

enum class SplitSide { Train, Test };
enum class SplitPolicy { TrajectoryFraction, AgencyHoldout };

struct SplitAssignment {
    std::map<std::string, SplitSide> side;
    std::uint64_t seed = 0;
    SplitPolicy policy = SplitPolicy::TrajectoryFraction;
    std::string held_out_agency;

    SplitSide at(const std::string& storm_id) const;
    std::size_t count(SplitSide s) const;
};

std::string_view to_string(SplitPolicy p);

}  // namespace sprobe
