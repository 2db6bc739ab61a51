#include <cassert>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sprobe/error.hpp"
#include "sprobe/synth.hpp"

namespace sprobe::synth {

namespace {

// Dyadic grid so that dyadic encoder weights reproduce values exactly in float32.
double quantize(double v) { return std::round(v * 64.0) / 64.0; }

constexpr double kPressureOffset = 1000.0;
constexpr std::size_t kPressureCoords = 4;
constexpr std::size_t kWindCoords = 4;

}  // namespace

double coriolis(double lat_deg) { return 15e-5 * std::sin(std::abs(lat_deg) * std::numbers::pi / 180.0); }

double gradient_wind_ms(double deficit_hpa, double lat_deg, double b_km_per_deg, double c) {
    if (!(deficit_hpa >= 0.0)) throw ValidationError("gradient wind: pressure deficit must be non-negative");
    if (deficit_hpa == 0.0) return 0.0;
    const double fr = coriolis(lat_deg) * b_km_per_deg * std::abs(lat_deg) * 1000.0;
    const double disc = fr * fr + 4.0 * c * deficit_hpa;
    assert(disc >= 0.0);
    // Positive root of V^2 + fr V - c dP, written without cancellation.
    return 2.0 * c * deficit_hpa / (fr + std::sqrt(disc));
}

nlohmann::json to_json(const ToyParams& p) {
    return {{"env_pressure_hpa", p.env_pressure_hpa},
            {"max_deficit_hpa", p.max_deficit_hpa},
            {"min_peak_deficit_hpa", p.min_peak_deficit_hpa},
            {"b_km_per_deg", p.b_km_per_deg},
            {"wind_coeff", p.wind_coeff},
            {"lat_min_deg", p.lat_min_deg},
            {"lat_max_deg", p.lat_max_deg},
            {"ramp_steps", {p.min_ramp_steps, p.max_ramp_steps}},
            {"decay_steps", {p.min_decay_steps, p.max_decay_steps}},
            {"dt_hours", p.dt_hours},
            {"start", p.start},
            {"dim", p.dim},
            {"nuisance_rank", p.nuisance_rank},
            {"nuisance_scale", p.nuisance_scale},
            {"noise_scale", p.noise_scale},
            {"collapse_floor", p.collapse_floor},
            {"saturation", p.saturation},
            {"pressure_knee_hpa", p.pressure_knee_hpa},
            {"pressure_scale_hpa", p.pressure_scale_hpa},
            {"wind_knee_kt", p.wind_knee_kt},
            {"wind_scale_kt", p.wind_scale_kt},
            {"exact", p.exact}};
}

EncoderSpec toy_encoder(const ToyParams& p) {
    if (p.dim < kPressureCoords + kWindCoords + p.nuisance_rank)
        throw ValidationError("cyclone_toy: dim must be at least 8 + nuisance_rank");
    EncoderSpec spec;
    spec.A = MatrixXd::Zero(static_cast<Eigen::Index>(p.dim), 2);
    for (std::size_t i = 0; i < kPressureCoords; ++i) spec.A(static_cast<Eigen::Index>(i), 0) = 1.0 / 16.0;
    for (std::size_t i = 0; i < kWindCoords; ++i)
        spec.A(static_cast<Eigen::Index>(kPressureCoords + i), 1) = 1.0 / 64.0;
    if (p.saturation) {
        spec.saturation.push_back({0, p.pressure_knee_hpa - kPressureOffset, p.pressure_scale_hpa, true});
        spec.saturation.push_back({1, p.wind_knee_kt, p.wind_scale_kt, false});
    }
    return spec;
}

ToyOutput cyclone_toy(const ToyParams& p, std::size_t n_storms, std::uint64_t seed) {
    if (n_storms == 0) throw ValidationError("cyclone_toy: need at least one storm");
    if (!(p.b_km_per_deg > 0.0)) throw ValidationError("cyclone_toy: B must be positive");
    if (!(p.wind_coeff > 0.0)) throw ValidationError("cyclone_toy: wind coefficient must be positive");
    if (!(p.lat_min_deg >= 0.0 && p.lat_min_deg < p.lat_max_deg && p.lat_max_deg <= 90.0))
        throw ValidationError("cyclone_toy: latitude range must satisfy 0 <= min < max <= 90");
    if (!(p.min_peak_deficit_hpa > 0.0 && p.min_peak_deficit_hpa <= p.max_deficit_hpa))
        throw ValidationError("cyclone_toy: peak deficit range is empty");
    if (p.env_pressure_hpa > kMaxPressureHpa || p.env_pressure_hpa - p.max_deficit_hpa < kMinPressureHpa)
        throw ValidationError("cyclone_toy: pressures would leave [850, 1050] hPa");
    if (p.min_ramp_steps < 1 || p.max_ramp_steps < p.min_ramp_steps || p.min_decay_steps < 1 ||
        p.max_decay_steps < p.min_decay_steps)
        throw ValidationError("cyclone_toy: ramp/decay step ranges are invalid");
    if (p.dt_hours != 3.0) throw ValidationError("cyclone_toy: records live on the 3-hour grid");
    if (!(p.collapse_floor > 0.0 && p.collapse_floor <= 1.0))
        throw ValidationError("cyclone_toy: collapse floor must lie in (0, 1]");

    const EncoderSpec spec = toy_encoder(p);
    const VectorXd no_regime;
    ToyOutput out;
    std::vector<VectorXd> rows;
    for (std::size_t k = 0; k < n_storms; ++k) {
        Rng rng(derive_seed(seed, k));
        char id[32];
        std::snprintf(id, sizeof id, "TOY%05zu", k);
        const double lat = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(p.lat_min_deg, p.lat_max_deg);
        const double lon = canonical_lon(rng.uniform(-180.0, 180.0));
        const std::string agency = rng.uniform() < 0.5 ? "hurdat_atl" : "hurdat_epa";
        // Storm 0 pins the archive extremes: it starts quiescent and reaches the maximum deficit.
        const double genesis = k == 0 ? 0.0 : rng.uniform(0.0, 8.0);
        const double peak = k == 0 ? p.max_deficit_hpa : rng.uniform(p.min_peak_deficit_hpa, p.max_deficit_hpa);
        const double final_deficit = rng.uniform(0.0, std::min(peak, 8.0));
        const int ramp = p.min_ramp_steps + static_cast<int>(rng.index(
                                                static_cast<std::uint64_t>(p.max_ramp_steps - p.min_ramp_steps + 1)));
        const int decay = p.min_decay_steps + static_cast<int>(rng.index(static_cast<std::uint64_t>(
                                                  p.max_decay_steps - p.min_decay_steps + 1)));
        const UnixSeconds t0 = p.start + static_cast<UnixSeconds>(k) * 86400;

        Trajectory traj;
        traj.storm_id = id;
        for (int i = 0; i <= ramp + decay; ++i) {
            const double deficit = i <= ramp
                                       ? genesis + (peak - genesis) * i / ramp
                                       : peak + (final_deficit - peak) * (i - ramp) / static_cast<double>(decay);
            StormRecord r;
            r.storm_id = id;
            r.agency = agency;
            r.timestamp = t0 + static_cast<UnixSeconds>(i) * kThreeHours;
            r.lat = lat;
            r.lon = lon;
            r.pressure_hpa = quantize(p.env_pressure_hpa - deficit);
            const double dq = p.env_pressure_hpa - r.pressure_hpa;
            r.wind_kt = quantize(gradient_wind_ms(dq, lat, p.b_km_per_deg, p.wind_coeff) * kKnotsPerMs);
            validate(r);

            VectorXd y(2);
            y << r.pressure_hpa - kPressureOffset, r.wind_kt;
            VectorXd z = encode(spec, no_regime, y);
            if (!p.exact) {
                const double shrink =
                    p.saturation ? p.collapse_floor + (1.0 - p.collapse_floor) * saturation_slope(spec.saturation, y)(0)
                                 : 1.0;
                const auto base = static_cast<Eigen::Index>(kPressureCoords + kWindCoords);
                for (std::size_t q = 0; q < p.nuisance_rank; ++q)
                    z(base + static_cast<Eigen::Index>(q)) +=
                        (q == 0 ? 1.0 : shrink) * p.nuisance_scale * rng.normal();
                for (Eigen::Index j = 0; j < z.size(); ++j) z(j) += p.noise_scale * rng.normal();
            }
            rows.push_back(std::move(z));
            traj.records.push_back(std::move(r));
        }
        validate(traj);
        for (const auto& r : traj.records) out.store.meta.push_back(r);
        out.storms.push_back(std::move(traj));
    }
    out.store.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.dim));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.store.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose().cast<float>();
    out.store.aggregation = Aggregation::Cls;
    validate(out.store);
    return out;
}

}  // namespace sprobe::synth
