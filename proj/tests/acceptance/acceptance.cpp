// Acceptance suite: one PASS/FAIL line per criterion, with its tolerance and time limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sprobe/collapse.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/probes.hpp"
#include "sprobe/store.hpp"
#include "sprobe/synth.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace sprobe;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double mean_over_regimes(const ProbeReport& r) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& [_, v] : r.per_regime) {
        s += v.mean * static_cast<double>(v.count);
        n += v.count;
    }
    return s / static_cast<double>(n);
}

double relative_gap(double intense, double moderate) { return (intense - moderate) / moderate; }

// ---------------------------------------------------------------------------

Outcome ridge_oracle() {
    double worst_coef = 0.0;
    std::size_t alpha_mismatch = 0;
    const auto grid = numkit::default_alpha_grid();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(derive_seed(2024, seed));
        const auto n = static_cast<Eigen::Index>(20 + rng.index(181));  // n <= 200
        const auto d = static_cast<Eigen::Index>(1 + rng.index(50));    // d <= 50
        MatrixXd X(n, d);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
        VectorXd w(d);
        for (auto& v : w) v = rng.normal() * (rng.uniform() < 0.3 ? 1.0 : 0.1);
        VectorXd y = X * w;
        for (auto& v : y) v += rng.normal();
        const double alpha = grid[rng.index(grid.size())];
        const auto fit = numkit::ridge_fit(X, y, alpha);
        const auto ref = oracle::ridge_normal_equations(X, y, alpha);
        worst_coef = std::max({worst_coef, (fit.weights - ref.w).cwiseAbs().maxCoeff(), std::abs(fit.intercept - ref.b)});

        const int k = 5;
        const auto cv = numkit::ridge_cv(X, y, grid, k, seed);
        const double expect = oracle::exhaustive_cv_alpha(X, y, grid, numkit::kfold_assignment(static_cast<std::size_t>(n), k, seed), k);
        alpha_mismatch += cv.chosen_alpha != expect;
    }
    return {worst_coef <= 1e-8 && alpha_mismatch == 0,
            "max |coef - oracle| " + fmt("%.2e", worst_coef) + " (tol 1e-8), CV alpha mismatches " +
                std::to_string(alpha_mismatch) + "/50"};
}

Outcome bound_suite() {
    const auto suite = synth::bound_suite(0, 100, synth::BoundOptions{});
    double worst = 1e300;
    std::size_t violations = 0;
    for (const auto& e : suite) {
        worst = std::min(worst, e.bounds.worst_margin);
        violations += e.bounds.worst_margin < -1e-6;
    }
    return {suite.size() == 100 && violations == 0,
            std::to_string(suite.size()) + " systems, min margin " + fmt("%+.3e", worst) + " (tol -1e-6), violations " +
                std::to_string(violations)};
}

Outcome rollout_suite() {
    const auto suite = synth::rollout_suite(0, 100, 50, 0.05);
    double worst = 1e300, worst_ratio = 0.0;
    std::size_t violations = 0, slope_violations = 0;
    for (const auto& e : suite) {
        const auto& r = e.rollout;
        for (std::size_t n = 0; n < r.errors.size(); ++n) {
            worst = std::min(worst, r.bounds[n] - r.errors[n]);
            violations += r.errors[n] > r.bounds[n] + 1e-6;
        }
        if (r.eps_dyn > 0.0) worst_ratio = std::max(worst_ratio, r.slope / r.eps_dyn);
        slope_violations += r.slope > 1.1 * r.eps_dyn + 1e-6;
    }
    return {!suite.empty() && violations == 0 && slope_violations == 0,
            std::to_string(suite.size()) + " rollouts x 50 steps, min margin " + fmt("%+.3e", worst) +
                ", max slope/eps_dyn " + fmt("%.3f", worst_ratio) + " (limit 1.10)"};
}

struct ToyProbe {
    double xi_gap = 0.0;
    double d_eff_drop = 0.0;
};

ToyProbe toy_gaps(bool saturation) {
    synth::ToyParams p;
    p.saturation = saturation;
    const auto toy = synth::cyclone_toy(p, 600, 1);
    probes::ProbeConfig c;
    const auto split = probes::trajectory_split(probes::storm_ids(toy.store), c.split_fraction, 0);
    const auto stat = probes::probe_static(toy.store, split, c);
    collapse::CollapseConfig cc;
    cc.min_count = 100;
    const auto col = collapse::collapse_report(toy.store, cc);
    return {relative_gap(stat.report.per_regime.at(Regime::Intense).mean, stat.report.per_regime.at(Regime::Moderate).mean),
            col.d_eff_relative_drop};
}

Outcome saturation_gap() {
    const auto on = toy_gaps(true);
    const auto off = toy_gaps(false);
    const bool pass = on.xi_gap >= 0.20 && on.d_eff_drop >= 0.20 && std::abs(off.xi_gap) <= 0.05 &&
                      std::abs(off.d_eff_drop) <= 0.05;
    return {pass, "saturation on: xi gap " + fmt("%+.1f%%", 100 * on.xi_gap) + ", d_eff drop " +
                      fmt("%.1f%%", 100 * on.d_eff_drop) + " (>= 20%); off: " + fmt("%+.1f%%", 100 * off.xi_gap) +
                      ", " + fmt("%+.1f%%", 100 * off.d_eff_drop) + " (|.| <= 5%)"};
}

Outcome latitude_wind_ordering() {
    synth::ToyParams p;
    const auto toy = synth::cyclone_toy(p, 600, 1);
    probes::ProbeConfig c;
    // Ground truth straight from the records: mean wind at low minus high latitude per intense bin.
    std::map<long long, std::pair<std::vector<double>, std::vector<double>>> bins;
    for (const auto& r : toy.store.meta) {
        if (regime_of(r.pressure_hpa) != Regime::Intense) continue;
        auto& b = bins[numkit::bin_index(r.pressure_hpa, c.pressure_bin_width_hpa)];
        if (std::abs(r.lat) < c.lat_low_band_deg) b.first.push_back(r.wind_kt);
        if (std::abs(r.lat) > c.lat_high_band_deg) b.second.push_back(r.wind_kt);
    }
    std::size_t checked = 0, nonpositive = 0;
    double min_dv = 1e300;
    for (const auto& [k, b] : bins) {
        if (b.first.empty() || b.second.empty()) continue;
        const double dv = numkit::mean(b.first) - numkit::mean(b.second);
        ++checked;
        nonpositive += !(dv > 0.0);
        min_dv = std::min(min_dv, dv);
    }

    p.exact = true;
    p.saturation = false;
    const auto exact = synth::cyclone_toy(p, 600, 1);
    const auto split = probes::trajectory_split(probes::storm_ids(exact.store), c.split_fraction, 0);
    const auto rep = probes::probe_manifold(exact.store, exact.store, split, c);
    const double psi = probes::probe_value(rep);
    return {checked > 0 && nonpositive == 0 && psi <= 1e-6,
            "true dV > 0 in " + std::to_string(checked - nonpositive) + "/" + std::to_string(checked) +
                " intense bins (min " + fmt("%.2f", min_dv) + " kt); exact psi_con " + fmt("%.2e", psi) +
                " (tol 1e-6)"};
}

Outcome exact_encoder() {
    synth::ToyParams p;
    const auto toy = synth::cyclone_toy(p, 600, 2);
    // Dyadic A keeps A * P exactly representable in float32 for P on the 1/64 hPa grid.
    Rng rng(77);
    VectorXd a(16);
    for (auto& v : a) v = (1.0 + static_cast<double>(rng.index(16))) / 8.0 * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    const auto store = test::make_store(toy.store.meta, 16, [&](const StormRecord& r, Rng&) {
        return VectorXd(a * r.pressure_hpa);
    });
    probes::ProbeConfig c;
    const auto split = probes::trajectory_split(probes::storm_ids(store), c.split_fraction, 0);
    const auto stat = probes::probe_static(store, split, c);
    const auto dyn = probes::probe_dynamic(store, split, stat.readout, stat.report.sigma_normalizer, c);
    const double xs = probes::probe_value(stat.report), xd = probes::probe_value(dyn);
    return {xs <= 1e-6 && xd <= 1e-6,
            "xi_stat " + fmt("%.2e", xs) + ", xi_dyn " + fmt("%.2e", xd) + " hPa (tol 1e-6)"};
}

double intercept_only_error(const FeatureStore& store, std::uint64_t split_seed) {
    probes::ProbeConfig c;
    const auto split = probes::trajectory_split(probes::storm_ids(store), c.split_fraction, split_seed);
    const auto res = probes::probe_static(store, split, c);

    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < store.rows(); ++i)
        (split.at(store.meta[i].storm_id) == SplitSide::Train ? train : test).push_back(i);
    auto balanced = [&](const std::vector<std::size_t>& rows, std::uint64_t stream) {
        std::vector<Regime> labels;
        for (auto r : rows) labels.push_back(regime_of(store.meta[r].pressure_hpa));
        std::vector<long double> out;
        for (auto k : probes::regime_balance(labels, derive_seed(c.seeds.balance, stream)))
            out.push_back(store.meta[rows[k]].pressure_hpa);
        return out;
    };
    const auto ptr = balanced(train, 0), pte = balanced(test, 1);
    long double mu = 0.0L, var = 0.0L, mae = 0.0L;
    for (auto v : ptr) mu += v;
    mu /= static_cast<long double>(ptr.size());
    for (auto v : ptr) var += (v - mu) * (v - mu);
    const long double sigma = std::sqrt(var / static_cast<long double>(ptr.size()));
    for (auto v : pte) mae += std::fabs(v - mu);
    const double expect = static_cast<double>(mae / static_cast<long double>(pte.size()) / sigma);
    return std::abs(mean_over_regimes(res.report) - expect) / expect;
}

Outcome intercept_only() {
    double worst = 0.0;
    {
        auto store = synth::cyclone_toy(synth::ToyParams{}, 300, 4).store;
        store.features.setZero();
        worst = std::max(worst, intercept_only_error(store, 1));
    }
    {
        const auto store = test::make_store(test::balanced_records(90, 5, 6), 8,
                                            [](const StormRecord&, Rng&) { return VectorXd(VectorXd::Zero(8)); });
        worst = std::max(worst, intercept_only_error(store, 2));
    }
    return {worst <= 1e-12, "max relative |mean xi - MAE/sigma| " + fmt("%.2e", worst) + " over 2 fixtures (tol 1e-12)"};
}

Outcome pipeline_fixtures() {
    namespace fs = std::filesystem;
    using namespace pipeline;
    const fs::path data = SPROBE_GOLDEN_DIR;
    std::vector<std::string> failures;
    auto bytes = [](const std::vector<float>& v) {
        return std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
    };

    // Crop wraparound / padding / latitude bounds.
    const auto cases = nlohmann::json::parse(read_file(data / "crops.json"));
    const std::string crops = read_file(data / "crops.f32");
    std::size_t off = 0;
    const std::size_t fb = kCropSize * kCropSize * sizeof(float);
    std::map<std::string, GridFrame> grids;
    for (const auto& c : cases) {
        const std::string g = c["grid"];
        if (!grids.count(g)) grids[g] = read_grid(data / g, "irwin_cdr");
        const auto w = extract_crop(grids[g], c["lat"].get<double>(), c["lon"].get<double>());
        if (w.discard_reason != c["discard_reason"].get<std::string>()) failures.push_back("crop discard");
        if (!w.discard_reason.empty()) continue;
        if (crops.compare(off, fb, bytes(w.values)) != 0) failures.push_back("crop bytes");
        const auto shifted = extract_crop(grids[g], c["lat"].get<double>(), c["lon"].get<double>() + 360.0);
        if (bytes(shifted.values) != bytes(w.values)) failures.push_back("crop L+360");
        off += fb;
    }

    // Quality masking.
    std::vector<float> window(kCropSize * kCropSize);
    const std::string qin = read_file(data / "quality_in.f32");
    std::memcpy(window.data(), qin.data(), qin.size());
    const auto q = quality_check(window);
    if (q.status != CropStatus::Kept || bytes(q.values) != read_file(data / "quality_out.f32"))
        failures.push_back("quality");

    // 3-hour interpolation and idempotence.
    std::map<std::string, std::vector<RawTrackRow>> by_storm;
    for (auto& r : read_tracks_csv(data / "tracks_in.csv")) by_storm[r.storm_id].push_back(r);
    std::string packed;
    for (const auto& [id, rows] : by_storm) {
        const auto t = clean_track(rows);
        if (!t.track) {
            failures.push_back("clean " + id);
            continue;
        }
        const auto again = clean_track(*t.track);
        if (!again.track || !(*again.track == *t.track)) failures.push_back("idempotence " + id);
        for (const auto& r : t.track->records) {
            char buf[40];
            std::memcpy(buf, &r.timestamp, 8);
            std::memcpy(buf + 8, &r.lat, 8);
            std::memcpy(buf + 16, &r.lon, 8);
            std::memcpy(buf + 24, &r.pressure_hpa, 8);
            std::memcpy(buf + 32, &r.wind_kt, 8);
            packed.append(buf, 40);
        }
    }
    if (packed != read_file(data / "tracks_clean.bin")) failures.push_back("interpolation bytes");
    for (const auto& storm : synth::cyclone_toy(synth::ToyParams{}, 50, 3).storms) {
        const auto t = clean_track(storm);
        if (!t.track || !(*t.track == storm)) failures.push_back("toy idempotence");
    }

    // Two full builds are byte-identical.
    test::TempDir dir;
    fs::create_directories(dir / "grids");
    std::vector<RawTrackRow> rows;
    for (int k = 0; k < 8; ++k) {
        const UnixSeconds t = 946684800 + k * kThreeHours;
        rows.push_back({"AL01", "hurdat_atl", t, 12.0 + 0.3 * k, 179.0 + 0.4 * k, 1000.0 - 3 * k, 35.0 + 4 * k});
        rows.push_back({"WP02", "jtwc_wp", t, 8.0, 140.0 - 0.2 * k, 990.0 - k, 50.0 + k});
        GridFrame g = grids.at("wrap_grid.tcgr");
        g.timestamp = t;
        for (std::size_t i = 0; i < g.values.size(); i += 97 + static_cast<std::size_t>(k)) g.values[i] = 300.0f;
        write_raw_grid(g, dir / "grids" / ("f" + std::to_string(k) + ".tcgr"));
    }
    atomic_write(dir / "tracks.csv", format_tracks_csv(rows));
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    const auto ra = build_dataset(dir / "tracks.csv", dir / "grids", dir / "a" / "x.tcim");
    build_dataset(dir / "tracks.csv", dir / "grids", dir / "b" / "x.tcim");
    for (const char* f : {"x.tcim", "x.tcim.meta.csv", "manifest.json"})
        if (read_file(dir / "a" / f) != read_file(dir / "b" / f)) failures.push_back(std::string("build ") + f);
    if (ra.kept != 16) failures.push_back("build kept " + std::to_string(ra.kept));

    std::string detail = "crops, quality mask, interpolation goldens; idempotence; two builds byte-identical";
    if (!failures.empty()) {
        detail = "failures:";
        for (const auto& f : failures) detail += " [" + f + "]";
    }
    return {failures.empty(), detail};
}

Outcome collapse_calibration() {
    std::string detail;
    bool pass = true;
    for (std::size_t d : {16u, 32u}) {
        std::vector<StormRecord> meta;
        Rng rng(d);
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 5000; ++i) {
                StormRecord r;
                r.storm_id = "G" + std::to_string(b * 1000 + i / 25);
                r.agency = "hurdat_atl";
                r.timestamp = 946684800 + static_cast<UnixSeconds>(i % 25) * kThreeHours;
                r.lat = 15.0;
                r.lon = -50.0;
                r.pressure_hpa = (b ? 955.0 : 1005.0) + rng.uniform(-4.9, 4.9);
                r.wind_kt = 50.0;
                meta.push_back(r);
            }
        const auto store = test::make_store(meta, d, [d](const StormRecord&, Rng& g) {
            VectorXd z(static_cast<Eigen::Index>(d));
            for (auto& v : z) v = g.normal();
            return z;
        }, d + 1);
        collapse::CollapseConfig c;
        c.min_count = 1000;
        const auto rep = collapse::collapse_report(store, c);
        const double target_spread = std::sqrt(2.0 * static_cast<double>(d));
        for (const auto& b : rep.bins) {
            const double e_d = std::abs(b.d_eff - static_cast<double>(d)) / static_cast<double>(d);
            const double e_s = std::abs(b.spread - target_spread) / target_spread;
            pass = pass && b.count == 5000 && e_d <= 0.10 && e_s <= 0.10;
            detail += "d=" + std::to_string(d) + " bin " + fmt("%.0f", b.bin_center_hpa) + ": d_eff " +
                      fmt("%.2f", b.d_eff) + ", spread " + fmt("%.3f", b.spread) + "/" + fmt("%.3f", target_spread) + "; ";
        }
        pass = pass && rep.bins.size() == 2;
    }
    detail += "(tol 10%, n=5000)";
    return {pass, detail};
}

Outcome synthetic_end_to_end() {
    // Synthetic stores exercise the full probe path without extracted features.
    const auto toy = synth::cyclone_toy(synth::ToyParams{}, 300, 8);
    test::TempDir dir;
    write_feature_store(toy.store, dir / "f.tcfs");
    const auto store = read_feature_store(dir / "f.tcfs");
    probes::ProbeConfig c;
    c.con_min_count = 10;
    const auto split = probes::trajectory_split(probes::storm_ids(store), c.split_fraction, 0);
    const auto stat = probes::probe_static(store, split, c);
    const auto dyn = probes::probe_dynamic(store, split, stat.readout, stat.report.sigma_normalizer, c);
    const auto con = probes::probe_manifold(store, store, split, c);
    collapse::CollapseConfig cc;
    cc.min_count = 50;
    const auto col = collapse::collapse_report(store, cc);
    std::string problems;
    const auto cfg = probes::to_json(c);
    for (const auto& [name, doc] : std::vector<std::pair<std::string, nlohmann::json>>{
             {"stat", to_json(stat.report, cfg, probes::probe_value(stat.report))},
             {"dyn", to_json(dyn, cfg, probes::probe_value(dyn))},
             {"con", to_json(con, cfg, probes::probe_value(con))},
             {"collapse", collapse::to_json(col, cc)}}) {
        const auto p = check_report_schema(doc);
        if (!p.empty()) problems += " " + name + ": " + p;
    }
    return {problems.empty(), problems.empty() ? "stat, dyn, con and collapse reports schema-valid from a TCFS roundtrip"
                                               : "schema problems:" + problems};
}

struct Criterion {
    const char* name;
    double limit_s;  // 0 = no time limit
    std::function<Outcome()> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"ridge-oracle-equivalence", 10.0, ridge_oracle},
        {"bound-suite", 60.0, bound_suite},
        {"rollout-suite", 60.0, rollout_suite},
        {"saturation-regime-gap", 0.0, saturation_gap},
        {"latitude-wind-ordering", 0.0, latitude_wind_ordering},
        {"exact-encoder-null", 0.0, exact_encoder},
        {"intercept-only-identity", 0.0, intercept_only},
        {"pipeline-fixtures", 30.0, pipeline_fixtures},
        {"collapse-calibration", 0.0, collapse_calibration},
        {"synthetic-end-to-end", 0.0, synthetic_end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s <= 0.0 || secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::string timing = fmt("%.2f s", secs);
        if (c.limit_s > 0.0) timing += fmt(" (limit %.0f s)", c.limit_s);
        std::printf("%s %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
