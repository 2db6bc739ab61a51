#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sprobe/core.hpp"

namespace sprobe::collapse {

struct CollapseConfig {
    double bin_width_hpa = 10.0;
    std::size_t min_count = 500;
    std::size_t max_pairs = 200000;
    std::uint64_t seed = 0;
    double regime_threshold_hpa = kRegimeThresholdHpa;
    // Fit the global PCA on a regime-balanced subset of the store.
    bool balance = true;
};

nlohmann::json to_json(const CollapseConfig& c);

struct BinDiagnostics {
    double bin_center_hpa = 0.0;
    std::size_t count = 0;
    double pc1_mean = 0.0;
    double pc1_std = 0.0;
    double pc1_pressure_spearman = 0.0;  // NaN when pressure is constant in the bin
    double abs_spearman = 0.0;
    double d_eff = 0.0;  // NaN when the bin has zero variance
    double spread = 0.0;
    bool degenerate = false;
};

struct RegimeCollapse {
    std::size_t bins = 0;
    double mean_d_eff = 0.0;
    double mean_spread = 0.0;
    double mean_abs_spearman = 0.0;
};

struct CollapseReport {
    std::vector<BinDiagnostics> bins;  // ordered by bin center
    RegimeCollapse moderate;
    RegimeCollapse intense;
    // (moderate - intense) / moderate; positive means the intense regime collapsed.
    double d_eff_relative_drop = 0.0;
    double spread_relative_drop = 0.0;
    std::size_t pca_rows = 0;
    bool pca_balanced = false;
    std::string store_digest;
};

CollapseReport collapse_report(const FeatureStore& store, const CollapseConfig& config);

/// `bin_center_hpa,count,pc1_mean,pc1_std,pc1_spearman,d_eff,spread`
std::string bins_csv(const CollapseReport& r);
nlohmann::json to_json(const CollapseReport& r, const CollapseConfig& config);

}  // namespace sprobe::collapse
