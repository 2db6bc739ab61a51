#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sprobe/core.hpp"

namespace sprobe {

inline constexpr std::string_view kReportSchemaVersion = "1.0";

// Bounds: synthetic bound-verification summaries.
enum class ProbeId { Stat, Dyn, Con, Collapse, Rollout, Bounds };

std::string_view to_string(ProbeId id);
ProbeId parse_probe_id(std::string_view s);

struct RegimeSummary {
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    std::size_t count = 0;
};

struct BinStatistic {
    double bin_center_hpa = 0.0;
    double statistic = 0.0;
    std::size_t count = 0;
};

struct Provenance {
    std::uint64_t split_seed = 0;
    std::uint64_t balance_seed = 0;
    std::uint64_t cv_seed = 0;
    std::string split_policy;
    std::string store_digest;
    // Second input for probes that read two stores (wind features for the manifold probe).
    std::string aux_store_digest;
};

struct ProbeReport {
    ProbeId probe_id = ProbeId::Stat;
    double chosen_alpha = 0.0;
    double sigma_normalizer = 0.0;  // hPa
    std::map<Regime, RegimeSummary> per_regime;
    std::vector<BinStatistic> per_bin;
    Provenance provenance;
    // Probe-specific extras (manifold bin table, excluded-bin counts, ...).
    nlohmann::json diagnostics = nlohmann::json::object();
};

/// Residual means must be non-negative, sigma positive, counts consistent.
void validate(const ProbeReport& r);

/// Serializes with the pinned schema version; `config` is echoed verbatim.
nlohmann::json to_json(const ProbeReport& r, const nlohmann::json& config, double probe_value);

/// Structural check of a report document against the published schema.
/// Returns an empty string when valid, otherwise the first problem found.
std::string check_report_schema(const nlohmann::json& doc);

/// Per-bin CSV: `bin_center_hpa,statistic,count`.
std::string per_bin_csv(const ProbeReport& r);

}  // namespace sprobe
