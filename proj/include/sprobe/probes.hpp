#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sprobe/core.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/report.hpp"

namespace sprobe::probes {

struct ProbeSeeds {
    std::uint64_t split = 0;
    std::uint64_t balance = 0;
    std::uint64_t cv = 0;
};

struct ProbeConfig {
    double regime_threshold_hpa = kRegimeThresholdHpa;
    double split_fraction = 0.8;
    double dt_hours = 3.0;
    double lat_low_band_deg = 15.0;
    double lat_high_band_deg = 25.0;
    double pressure_bin_width_hpa = 10.0;
    // Minimum samples per latitude group inside a pressure bin (manifold probe).
    std::size_t con_min_count = 30;
    std::vector<double> alpha_grid = numkit::default_alpha_grid();
    int cv_folds = 5;
    // Agencies reporting 1-minute sustained winds; empty disables the filter.
    std::vector<std::string> wind_agencies = {"hurdat_atl", "hurdat_epa"};
    ProbeSeeds seeds;
};

/// Throws ValidationError on out-of-range fields.
void validate(const ProbeConfig& c);
nlohmann::json to_json(const ProbeConfig& c);

/// Seeded shuffle of sorted storm ids; the first ceil(fraction * S) go to Train.
SplitAssignment trajectory_split(const std::vector<std::string>& storm_ids, double fraction, std::uint64_t seed);
SplitAssignment trajectory_split(const std::vector<Trajectory>& storms, double fraction, std::uint64_t seed);

/// Storms whose agency equals `held_out_agency` go to Test, the rest to Train.
/// `storm_agency` pairs each storm id with its (single) reporting agency.
SplitAssignment agency_holdout_split(const std::vector<std::pair<std::string, std::string>>& storm_agency,
                                     const std::string& held_out_agency);
SplitAssignment agency_holdout_split(const std::vector<Trajectory>& storms, const std::string& held_out_agency);

/// Unique storm ids of a store, sorted.
std::vector<std::string> storm_ids(const FeatureStore& store);
/// (storm id, agency) pairs of a store; throws if a storm mixes agencies.
std::vector<std::pair<std::string, std::string>> storm_agencies(const FeatureStore& store);

/// Positions (into `labels`) of a regime-balanced subset, in ascending order.
/// The majority regime is downsampled uniformly without replacement.
std::vector<std::size_t> regime_balance(const std::vector<Regime>& labels, std::uint64_t seed);

/// Maximum of the per-regime mean residuals.
double probe_value(const ProbeReport& report);

struct StaticResult {
    ProbeReport report;
    numkit::LinearModel readout;  // pressure readout, reused by probe_dynamic
};

StaticResult probe_static(const FeatureStore& store, const SplitAssignment& split, const ProbeConfig& config);

struct DynamicPair {
    std::size_t earlier_row = 0;
    std::size_t later_row = 0;
    double earlier_pressure = 0.0;
    double residual = 0.0;  // |readout(z_{t+1}) - readout(z_t) - (P_{t+1} - P_t)|
};

/// Residuals for every consecutive same-storm pair exactly dt_hours apart among `rows`.
std::vector<DynamicPair> dynamic_residuals(const FeatureStore& store, const std::vector<std::size_t>& rows,
                                           const numkit::LinearModel& readout, double dt_hours);

ProbeReport probe_dynamic(const FeatureStore& store, const SplitAssignment& split,
                          const numkit::LinearModel& readout, double sigma_normalizer, const ProbeConfig& config);

/// Pressure and wind probes on (possibly distinct) row-aligned stores, then the
/// low/high-latitude wind separation per pressure bin.
ProbeReport probe_manifold(const FeatureStore& pressure_store, const FeatureStore& wind_store,
                           const SplitAssignment& split, const ProbeConfig& config);

}  // namespace sprobe::probes
