#include "sprobe/report.hpp"

#include <cmath>

#include "sprobe/error.hpp"
#include "sprobe/store.hpp"

namespace sprobe {

using nlohmann::json;

std::string_view to_string(ProbeId id) {
    switch (id) {
        case ProbeId::Stat: return "stat";
        case ProbeId::Dyn: return "dyn";
        case ProbeId::Con: return "con";
        case ProbeId::Collapse: return "collapse";
        case ProbeId::Rollout: return "rollout";
        case ProbeId::Bounds: return "bounds";
    }
    return "unknown";
}

ProbeId parse_probe_id(std::string_view s) {
    for (auto id : {ProbeId::Stat, ProbeId::Dyn, ProbeId::Con, ProbeId::Collapse, ProbeId::Rollout, ProbeId::Bounds})
        if (to_string(id) == s) return id;
    throw ValidationError("unknown probe id '" + std::string(s) + "'");
}

void validate(const ProbeReport& r) {
    if (!(r.sigma_normalizer > 0.0) || !std::isfinite(r.sigma_normalizer))
        throw ValidationError("probe report: sigma_normalizer must be positive and finite");
    for (const auto& [regime, s] : r.per_regime) {
        if (s.mean < 0.0 || s.median < 0.0 || s.p90 < 0.0)
            throw ValidationError("probe report: negative residual statistic for " + std::string(to_string(regime)));
    }
}

json to_json(const ProbeReport& r, const json& config, double probe_value) {
    json per_regime = json::object();
    for (const auto& [regime, s] : r.per_regime)
        per_regime[std::string(to_string(regime))] = {
            {"mean", s.mean}, {"median", s.median}, {"p90", s.p90}, {"count", s.count}};
    json per_bin = json::array();
    for (const auto& b : r.per_bin)
        per_bin.push_back({{"bin_center_hpa", b.bin_center_hpa}, {"statistic", b.statistic}, {"count", b.count}});
    const auto& p = r.provenance;
    json prov = {{"split_seed", p.split_seed},
                 {"balance_seed", p.balance_seed},
                 {"cv_seed", p.cv_seed},
                 {"split_policy", p.split_policy},
                 {"store_digest", p.store_digest}};
    if (!p.aux_store_digest.empty()) prov["aux_store_digest"] = p.aux_store_digest;
    return json{{"schema_version", std::string(kReportSchemaVersion)},
                {"probe_id", std::string(to_string(r.probe_id))},
                {"config", config},
                {"provenance", prov},
                {"surrogate",
                 {{"alpha", r.chosen_alpha}, {"sigma_normalizer", r.sigma_normalizer}, {"cv_metric", "squared_error"}}},
                {"per_regime", per_regime},
                {"per_bin", per_bin},
                {"probe_value", probe_value},
                {"diagnostics", r.diagnostics}};
}

std::string check_report_schema(const json& doc) {
    if (!doc.is_object()) return "report is not a JSON object";
    for (const char* key :
         {"schema_version", "probe_id", "config", "provenance", "per_regime", "per_bin", "probe_value"})
        if (!doc.contains(key)) return std::string("missing required key '") + key + "'";
    if (!doc["schema_version"].is_string() || doc["schema_version"] != kReportSchemaVersion)
        return "schema_version must be \"" + std::string(kReportSchemaVersion) + "\"";
    if (!doc["probe_id"].is_string()) return "probe_id must be a string";
    try {
        parse_probe_id(doc["probe_id"].get<std::string>());
    } catch (const ValidationError& e) {
        return e.what();
    }
    if (!doc["config"].is_object()) return "config must be an object";
    const auto& prov = doc["provenance"];
    if (!prov.is_object()) return "provenance must be an object";
    for (const char* key : {"split_seed", "balance_seed", "cv_seed"})
        if (!prov.contains(key) || !prov[key].is_number_unsigned())
            return std::string("provenance.") + key + " must be a non-negative integer";
    if (!prov.contains("store_digest") || !prov["store_digest"].is_string())
        return "provenance.store_digest must be a string";
    if (!doc["per_regime"].is_object()) return "per_regime must be an object";
    for (const auto& [name, v] : doc["per_regime"].items()) {
        if (name != "Moderate" && name != "Intense") return "per_regime key '" + name + "' is not a regime";
        if (!v.is_object() || !v.contains("count") || !v["count"].is_number_unsigned())
            return "per_regime." + name + ".count must be a non-negative integer";
        for (const auto& [field, x] : v.items())
            if (!x.is_number() && !x.is_null()) return "per_regime." + name + "." + field + " must be numeric";
    }
    if (!doc["per_bin"].is_array()) return "per_bin must be an array";
    for (const auto& b : doc["per_bin"]) {
        if (!b.is_object() || !b.contains("bin_center_hpa") || !b["bin_center_hpa"].is_number())
            return "per_bin entries need a numeric bin_center_hpa";
        if (!b.contains("count") || !b["count"].is_number_unsigned())
            return "per_bin entries need a non-negative integer count";
    }
    if (!doc["probe_value"].is_number() && !doc["probe_value"].is_null()) return "probe_value must be numeric";
    if (doc.contains("surrogate") && !doc["surrogate"].is_object()) return "surrogate must be an object";
    if (doc.contains("diagnostics") && !doc["diagnostics"].is_object()) return "diagnostics must be an object";
    return {};
}

std::string per_bin_csv(const ProbeReport& r) {
    std::string out = "bin_center_hpa,statistic,count\n";
    for (const auto& b : r.per_bin) {
        out += format_double(b.bin_center_hpa);
        out += ',';
        out += format_double(b.statistic);
        out += ',';
        out += std::to_string(b.count);
        out += '\n';
    }
    return out;
}

}  // namespace sprobe
