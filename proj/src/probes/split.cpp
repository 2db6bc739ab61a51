#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "sprobe/error.hpp"
#include "sprobe/probes.hpp"
#include "sprobe/rng.hpp"

namespace sprobe::probes {

void validate(const ProbeConfig& c) {
    if (!(c.regime_threshold_hpa >= kMinPressureHpa && c.regime_threshold_hpa <= kMaxPressureHpa))
        throw ValidationError("regime threshold must lie within [850, 1050] hPa");
    if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
        throw ValidationError("split fraction must lie strictly between 0 and 1");
    if (!(c.lat_low_band_deg < c.lat_high_band_deg))
        throw ValidationError("latitude bands must satisfy low < high");
    if (!(c.dt_hours > 0.0)) throw ValidationError("dt_hours must be positive");
    if (!(c.pressure_bin_width_hpa > 0.0)) throw ValidationError("pressure bin width must be positive");
    if (c.cv_folds < 2) throw ValidationError("cv_folds must be at least 2");
    if (c.alpha_grid.empty()) throw ValidationError("alpha grid must not be empty");
}

nlohmann::json to_json(const ProbeConfig& c) {
    return {{"regime_threshold_hpa", c.regime_threshold_hpa},
            {"split_fraction", c.split_fraction},
            {"dt_hours", c.dt_hours},
            {"lat_low_band_deg", c.lat_low_band_deg},
            {"lat_high_band_deg", c.lat_high_band_deg},
            {"pressure_bin_width_hpa", c.pressure_bin_width_hpa},
            {"con_min_count", c.con_min_count},
            {"alpha_grid", c.alpha_grid},
            {"cv_folds", c.cv_folds},
            {"cv_metric", "squared_error"},
            {"wind_agencies", c.wind_agencies},
            {"seeds", {{"split", c.seeds.split}, {"balance", c.seeds.balance}, {"cv", c.seeds.cv}}}};
}

SplitAssignment trajectory_split(const std::vector<std::string>& storm_ids, double fraction, std::uint64_t seed) {
    std::vector<std::string> ids(storm_ids);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() < 2) throw ValidationError("trajectory_split: need at least 2 storms");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("trajectory_split: fraction must be in (0, 1)");
    const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ids.size())));
    if (n_train == 0 || n_train >= ids.size())
        throw ValidationError("trajectory_split: fraction " + std::to_string(fraction) + " over " +
                              std::to_string(ids.size()) + " storms leaves an empty split");
    Rng rng(seed);
    rng.shuffle(ids);
    SplitAssignment out;
    out.seed = seed;
    out.policy = SplitPolicy::TrajectoryFraction;
    for (std::size_t i = 0; i < ids.size(); ++i) out.side[ids[i]] = i < n_train ? SplitSide::Train : SplitSide::Test;
    return out;
}

SplitAssignment trajectory_split(const std::vector<Trajectory>& storms, double fraction, std::uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& t : storms) ids.push_back(t.storm_id);
    return trajectory_split(ids, fraction, seed);
}

SplitAssignment agency_holdout_split(const std::vector<std::pair<std::string, std::string>>& storm_agency,
                                     const std::string& held_out_agency) {
    SplitAssignment out;
    out.policy = SplitPolicy::AgencyHoldout;
    out.held_out_agency = held_out_agency;
    std::set<std::string> agencies;
    for (const auto& [id, agency] : storm_agency) {
        agencies.insert(agency);
        auto side = agency == held_out_agency ? SplitSide::Test : SplitSide::Train;
        auto [it, fresh] = out.side.emplace(id, side);
        if (!fresh && it->second != side)
            throw ValidationError("agency_holdout_split: storm " + id + " is reported by several agencies");
    }
    if (!agencies.contains(held_out_agency))
        throw ValidationError("agency_holdout_split: unknown agency '" + held_out_agency + "'");
    if (agencies.size() < 2)
        throw ValidationError("agency_holdout_split: holding out '" + held_out_agency + "' leaves no training agency");
    return out;
}

SplitAssignment agency_holdout_split(const std::vector<Trajectory>& storms, const std::string& held_out_agency) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& t : storms) {
        if (t.records.empty()) throw ValidationError("agency_holdout_split: storm " + t.storm_id + " has no records");
        for (const auto& r : t.records)
            if (r.agency != t.records.front().agency)
                throw ValidationError("agency_holdout_split: storm " + t.storm_id + " mixes agencies");
        pairs.emplace_back(t.storm_id, t.records.front().agency);
    }
    return agency_holdout_split(pairs, held_out_agency);
}

std::vector<std::string> storm_ids(const FeatureStore& store) {
    std::set<std::string> ids;
    for (const auto& r : store.meta) ids.insert(r.storm_id);
    return {ids.begin(), ids.end()};
}

std::vector<std::pair<std::string, std::string>> storm_agencies(const FeatureStore& store) {
    std::map<std::string, std::string> agency;
    for (const auto& r : store.meta) {
        auto [it, fresh] = agency.emplace(r.storm_id, r.agency);
        if (!fresh && it->second != r.agency)
            throw ValidationError("storm " + r.storm_id + " mixes agencies " + it->second + " and " + r.agency);
    }
    return {agency.begin(), agency.end()};
}

std::vector<std::size_t> regime_balance(const std::vector<Regime>& labels, std::uint64_t seed) {
    std::vector<std::size_t> moderate, intense;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == Regime::Intense ? intense : moderate).push_back(i);
    if (moderate.empty()) throw ValidationError("regime_balance: regime Moderate is empty");
    if (intense.empty()) throw ValidationError("regime_balance: regime Intense is empty");
    auto& major = moderate.size() >= intense.size() ? moderate : intense;
    const std::size_t keep = std::min(moderate.size(), intense.size());
    if (major.size() > keep) {
        // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
        Rng rng(seed);
        for (std::size_t i = 0; i < keep; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.index(major.size() - i));
            std::swap(major[i], major[j]);
        }
        major.resize(keep);
    }
    std::vector<std::size_t> out;
    out.reserve(2 * keep);
    out.insert(out.end(), moderate.begin(), moderate.end());
    out.insert(out.end(), intense.begin(), intense.end());
    std::sort(out.begin(), out.end());
    return out;
}

double probe_value(const ProbeReport& report) {
    if (report.per_regime.empty()) throw ValidationError("probe_value: report has no regimes");
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& [regime, s] : report.per_regime) v = std::max(v, s.mean);
    return v;
}

}  // namespace sprobe::probes
