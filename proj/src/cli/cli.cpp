#include "sprobe/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sprobe/collapse.hpp"
#include "sprobe/error.hpp"
#include "sprobe/pipeline.hpp"
#include "sprobe/probes.hpp"
#include "sprobe/report.hpp"
#include "sprobe/store.hpp"
#include "sprobe/synth.hpp"

namespace sprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

constexpr std::string_view kReadoutKind = "sprobe-readout";

fs::path data_root_file(const std::string& given, const char* flag, const char* default_name) {
    if (!given.empty()) return given;
    if (const char* root = std::getenv("TC_BENCH_DIR"); root && *root) return fs::path(root) / default_name;
    throw UsageError(std::string(flag) + " is required (or set TC_BENCH_DIR to the data root)");
}

void emit(const json& doc, const std::string& out_path, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        out << text;
    else
        atomic_write(out_path, text);
}

void emit_csv(const std::string& csv, const std::string& path) {
    if (!path.empty()) atomic_write(path, csv);
}

// ---- probe flags shared by probe-stat / probe-con ---------------------------

struct ProbeFlags {
    std::string features;
    std::string out;
    std::string csv;
    std::string holdout_agency;
    probes::ProbeConfig config;
};

void add_probe_flags(CLI::App* app, ProbeFlags& f, bool with_split) {
    app->add_option("--features", f.features, "Feature store (.tcfs); default $TC_BENCH_DIR/features.tcfs");
    app->add_option("--out", f.out, "Report JSON path (stdout when omitted)");
    app->add_option("--csv", f.csv, "Per-bin CSV path");
    app->add_option("--threshold", f.config.regime_threshold_hpa, "Intense regime threshold (hPa)")
        ->capture_default_str();
    app->add_option("--bin-width", f.config.pressure_bin_width_hpa, "Pressure bin width (hPa)")->capture_default_str();
    app->add_option("--balance-seed", f.config.seeds.balance, "Regime balancing seed")->capture_default_str();
    if (!with_split) return;
    app->add_option("--split-seed", f.config.seeds.split, "Trajectory split seed")->capture_default_str();
    app->add_option("--split-fraction", f.config.split_fraction, "Fraction of storms in train")->capture_default_str();
    app->add_option("--holdout-agency", f.holdout_agency, "Hold out one agency as the test set");
    app->add_option("--cv-seed", f.config.seeds.cv, "Cross-validation fold seed")->capture_default_str();
    app->add_option("--cv-folds", f.config.cv_folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--alpha-grid", f.config.alpha_grid, "Ridge penalties to search")->delimiter(',');
}

SplitAssignment make_split(const FeatureStore& store, const ProbeFlags& f) {
    if (!f.holdout_agency.empty()) return probes::agency_holdout_split(probes::storm_agencies(store), f.holdout_agency);
    return probes::trajectory_split(probes::storm_ids(store), f.config.split_fraction, f.config.seeds.split);
}

json config_echo(const ProbeFlags& f, const SplitAssignment& split) {
    json c = probes::to_json(f.config);
    c["split_policy"] = std::string(to_string(split.policy));
    if (split.policy == SplitPolicy::AgencyHoldout) c["held_out_agency"] = split.held_out_agency;
    return c;
}

json readout_json(const numkit::LinearModel& m, const ProbeReport& r, const ProbeFlags& f,
                  const SplitAssignment& split) {
    return {{"kind", std::string(kReadoutKind)},
            {"version", 1},
            {"target", "pressure_hpa"},
            {"weights", std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size())},
            {"intercept", m.intercept},
            {"alpha", m.alpha},
            {"sigma_normalizer", r.sigma_normalizer},
            {"store_digest", r.provenance.store_digest},
            {"config", config_echo(f, split)},
            {"holdout_agency", f.holdout_agency}};
}

// ---- subcommands ------------------------------------------------------------

int cmd_probe_stat(ProbeFlags& f, const std::string& readout_path, std::ostream& out) {
    probes::validate(f.config);
    const auto store = read_feature_store(data_root_file(f.features, "--features", "features.tcfs"));
    const auto split = make_split(store, f);
    const auto res = probes::probe_static(store, split, f.config);
    emit(to_json(res.report, config_echo(f, split), probes::probe_value(res.report)), f.out, out);
    emit_csv(per_bin_csv(res.report), f.csv);
    std::string rp = readout_path;
    if (rp.empty() && !f.out.empty()) rp = f.out + ".readout.json";
    if (!rp.empty()) atomic_write(rp, readout_json(res.readout, res.report, f, split).dump(2) + "\n");
    return kExitOk;
}

int cmd_probe_dyn(ProbeFlags& f, const std::string& readout_path, std::ostream& out) {
    if (readout_path.empty())
        throw UsageError(
            "probe-dyn needs the pressure readout fitted by probe-stat on the same split; run `sprobe probe-stat "
            "--readout FILE` first and pass --readout FILE");
    if (!fs::exists(readout_path)) throw UsageError("--readout " + readout_path + ": no such file (run probe-stat first)");
    json ro;
    try {
        ro = json::parse(read_file(readout_path));
    } catch (const json::exception& e) {
        throw FormatError(readout_path + ": " + e.what());
    }
    if (!ro.is_object() || ro.value("kind", "") != kReadoutKind)
        throw UsageError("--readout " + readout_path + " is not a probe-stat readout artifact");

    const auto store = read_feature_store(data_root_file(f.features, "--features", "features.tcfs"));
    if (ro.at("store_digest").get<std::string>() != store.digest)
        throw ValidationError("readout was fitted on store " + ro.at("store_digest").get<std::string>() +
                              ", not on " + store.digest);
    // Split, seeds and binning come from the readout so the dynamic probe runs on the probe-stat split.
    const json& c = ro.at("config");
    f.config.regime_threshold_hpa = c.at("regime_threshold_hpa").get<double>();
    f.config.split_fraction = c.at("split_fraction").get<double>();
    f.config.seeds.split = c.at("seeds").at("split").get<std::uint64_t>();
    f.config.seeds.balance = c.at("seeds").at("balance").get<std::uint64_t>();
    f.config.seeds.cv = c.at("seeds").at("cv").get<std::uint64_t>();
    f.config.alpha_grid = c.at("alpha_grid").get<std::vector<double>>();
    f.config.cv_folds = c.at("cv_folds").get<int>();
    f.holdout_agency = ro.value("holdout_agency", "");
    probes::validate(f.config);

    numkit::LinearModel readout;
    const auto w = ro.at("weights").get<std::vector<double>>();
    if (w.size() != store.dim())
        throw ValidationError("readout has " + std::to_string(w.size()) + " weights for " +
                              std::to_string(store.dim()) + "-dimensional features");
    readout.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    readout.intercept = ro.at("intercept").get<double>();
    readout.alpha = ro.at("alpha").get<double>();

    const auto split = make_split(store, f);
    const auto rep = probes::probe_dynamic(store, split, readout, ro.at("sigma_normalizer").get<double>(), f.config);
    emit(to_json(rep, config_echo(f, split), probes::probe_value(rep)), f.out, out);
    emit_csv(per_bin_csv(rep), f.csv);
    return kExitOk;
}

int cmd_probe_con(ProbeFlags& f, const std::string& wind_features, std::ostream& out) {
    probes::validate(f.config);
    const auto pstore = read_feature_store(data_root_file(f.features, "--features", "features.tcfs"));
    const auto wstore = wind_features.empty() ? pstore : read_feature_store(wind_features);
    const auto split = make_split(pstore, f);
    const auto rep = probes::probe_manifold(pstore, wstore, split, f.config);
    emit(to_json(rep, config_echo(f, split), probes::probe_value(rep)), f.out, out);
    emit_csv(per_bin_csv(rep), f.csv);
    return kExitOk;
}

struct CollapseFlags {
    std::string features, out, csv;
    collapse::CollapseConfig config;
    bool no_balance = false;
};

int cmd_collapse(CollapseFlags& f, std::ostream& out) {
    f.config.balance = !f.no_balance;
    const auto store = read_feature_store(data_root_file(f.features, "--features", "features.tcfs"));
    const auto rep = collapse::collapse_report(store, f.config);
    emit(collapse::to_json(rep, f.config), f.out, out);
    emit_csv(collapse::bins_csv(rep), f.csv);
    return kExitOk;
}

struct BuildFlags {
    std::string tracks, grids, out;
    pipeline::BuildConfig config;
};

int cmd_build(BuildFlags& f, std::ostream& out) {
    const auto tracks = data_root_file(f.tracks, "--tracks", "tracks.csv");
    const auto grids = data_root_file(f.grids, "--grids", "grids");
    const auto dest = data_root_file(f.out, "--out", "images.tcim");
    const auto res = pipeline::build_dataset(tracks, grids, dest, f.config);
    out << "kept " << res.kept << " of " << res.timesteps << " timesteps";
    for (const auto& [reason, n] : res.drop_reasons) out << "; " << reason << " " << n;
    out << "\nmanifest " << pipeline::build_manifest_path(dest).string() << "\n";
    return kExitOk;
}

struct SynthFlags {
    std::string out_dir;
    std::size_t storms = 600;
    std::uint64_t seed = 0;
    std::string saturation = "on";
    bool exact = false;
    synth::ToyParams params;
};

int cmd_synth(SynthFlags& f, std::ostream& out) {
    if (f.saturation != "on" && f.saturation != "off")
        throw UsageError("--saturation must be 'on' or 'off', got '" + f.saturation + "'");
    f.params.saturation = f.saturation == "on";
    f.params.exact = f.exact;
    fs::path dir = f.out_dir;
    if (dir.empty()) {
        const char* root = std::getenv("TC_BENCH_DIR");
        if (!root || !*root) throw UsageError("--out-dir is required (or set TC_BENCH_DIR to the data root)");
        dir = root;
    }
    fs::create_directories(dir);
    const auto toy = synth::cyclone_toy(f.params, f.storms, f.seed);
    atomic_write(dir / "tracks.csv", pipeline::format_tracks_csv(toy.storms));
    write_feature_store(toy.store, dir / "features.tcfs");
    const json cfg = {{"kind", "cyclone_toy"},
                      {"storms", f.storms},
                      {"seed", f.seed},
                      {"params", synth::to_json(f.params)},
                      {"rows", toy.store.rows()},
                      {"features_digest", store_digest(dir / "features.tcfs")},
                      {"tracks_digest", file_digest(dir / "tracks.csv")}};
    atomic_write(dir / "synth.json", cfg.dump(2) + "\n");
    out << "wrote " << toy.store.rows() << " rows from " << f.storms << " storms to " << dir.string() << "\n";
    return kExitOk;
}

json entry_json(const synth::BoundEntry& e) {
    return {{"empirical", e.empirical},
            {"empirical_max", e.empirical_max},
            {"theoretical", e.theoretical},
            {"margin", e.margin()},
            {"worst_margin", e.worst_margin()}};
}

json synthetic_report(ProbeId id, const json& config, std::uint64_t seed, double value, json diagnostics) {
    return {{"schema_version", std::string(kReportSchemaVersion)},
            {"probe_id", std::string(to_string(id))},
            {"config", config},
            {"provenance",
             {{"split_seed", 0u}, {"balance_seed", 0u}, {"cv_seed", seed}, {"split_policy", "none"}, {"store_digest", "none"}}},
            {"per_regime", json::object()},
            {"per_bin", json::array()},
            {"probe_value", value},
            {"diagnostics", std::move(diagnostics)}};
}

struct BoundFlags {
    std::uint64_t seed = 0;
    std::size_t systems = 100;
    std::size_t certify_samples = 100000;
    std::string out;
    synth::BoundOptions opt;
};

int cmd_verify_bounds(BoundFlags& f, std::ostream& out, std::ostream& err) {
    const auto suite = synth::bound_suite(f.seed, f.systems, f.opt, f.certify_samples);
    json systems = json::array();
    double worst = std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    const synth::SuiteEntry* witness = nullptr;
    for (const auto& e : suite) {
        const auto& b = e.bounds;
        systems.push_back({{"system_seed", e.system_seed},
                           {"encoder_seed", e.encoder_seed},
                           {"m", e.m},
                           {"d", e.d},
                           {"K", b.K},
                           {"lambda", b.lambda},
                           {"l_norm", b.l_norm},
                           {"eps_bar", b.eps_bar},
                           {"delta_bar", b.delta_bar},
                           {"stat", entry_json(b.stat)},
                           {"dyn", entry_json(b.dyn)},
                           {"con", entry_json(b.con)},
                           {"states", b.states}});
        if (b.worst_margin < -f.opt.tolerance) ++violations;
        if (b.worst_margin < worst) {
            worst = b.worst_margin;
            witness = &e;
        }
    }
    const json config = {{"seed", f.seed},
                         {"systems", f.systems},
                         {"samples", f.opt.samples},
                         {"steps", f.opt.n_steps},
                         {"dt_hours", f.opt.dt_hours},
                         {"substeps", f.opt.substeps},
                         {"tolerance", f.opt.tolerance},
                         {"certify_samples", f.certify_samples},
                         {"certify_inflation", 1.1}};
    json diag = {{"probe_value_meaning", "smallest pointwise margin (bound - residual) over all systems"},
                 {"violations", violations},
                 {"systems", systems}};
    emit(synthetic_report(ProbeId::Bounds, config, f.seed, worst, diag), f.out, out);
    if (violations && witness) {
        const auto& w = witness->bounds.worst;
        err << "bound violation: " << w.quantity << " residual " << w.value << " > bound " << w.bound
            << " (system seed " << witness->system_seed << ", regime " << w.regime << ", sample " << w.sample
            << ", state " << w.state << ")\n";
        return kExitValidation;
    }
    return kExitOk;
}

struct RolloutFlags {
    std::uint64_t seed = 0;
    std::size_t systems = 100;
    std::size_t steps = 50;
    double dt_hours = 0.05;
    double tolerance = 1e-6;
    double slope_slack = 0.10;
    std::size_t certify_samples = 100000;
    std::string out;
};

int cmd_rollout(RolloutFlags& f, std::ostream& out, std::ostream& err) {
    const auto suite = synth::rollout_suite(f.seed, f.systems, f.steps, f.dt_hours, f.certify_samples);
    json runs = json::array();
    double worst = std::numeric_limits<double>::infinity();
    std::size_t violations = 0, slope_violations = 0;
    for (const auto& e : suite) {
        const auto& r = e.rollout;
        const bool slope_ok = r.slope <= r.eps_dyn * (1.0 + f.slope_slack) + f.tolerance;
        runs.push_back({{"system_seed", e.system_seed},
                        {"encoder_seed", e.encoder_seed},
                        {"regime", e.regime},
                        {"eps_stat", r.eps_stat},
                        {"eps_dyn", r.eps_dyn},
                        {"slope", r.slope},
                        {"max_error", *std::max_element(r.errors.begin(), r.errors.end())},
                        {"min_margin", r.min_margin},
                        {"worst_step", r.worst_step},
                        {"slope_ok", slope_ok}});
        if (r.min_margin < -f.tolerance) {
            ++violations;
            err << "rollout bound violated: system seed " << e.system_seed << ", regime " << e.regime << ", step "
                << r.worst_step << "\n";
        }
        if (!slope_ok) ++slope_violations;
        worst = std::min(worst, r.min_margin);
    }
    const json config = {{"seed", f.seed},          {"systems", f.systems},       {"steps", f.steps},
                         {"dt_hours", f.dt_hours},  {"tolerance", f.tolerance},   {"slope_slack", f.slope_slack},
                         {"certify_samples", f.certify_samples}};
    json diag = {{"probe_value_meaning", "smallest margin eps_stat + eps_dyn*t - error over all rollouts"},
                 {"violations", violations},
                 {"slope_violations", slope_violations},
                 {"rollouts", runs}};
    emit(synthetic_report(ProbeId::Rollout, config, f.seed, worst, diag), f.out, out);
    return violations || slope_violations ? kExitValidation : kExitOk;
}

int cmd_report(const std::vector<std::string>& files, std::ostream& out) {
    bool ok = true;
    for (const auto& file : files) {
        json doc;
        std::string problem;
        try {
            doc = json::parse(read_file(file));
            problem = check_report_schema(doc);
        } catch (const json::exception& e) {
            problem = e.what();
        }
        if (!problem.empty()) {
            out << file << ": INVALID " << problem << "\n";
            ok = false;
            continue;
        }
        out << file << ": OK probe=" << doc["probe_id"].get<std::string>() << " value=" << doc["probe_value"].dump();
        for (const auto& [regime, s] : doc["per_regime"].items())
            out << " " << regime << ".count=" << s["count"].dump();
        out << "\n";
    }
    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Representation probes, collapse diagnostics and bound verification"};
    app.name(args.empty() ? "sprobe" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    BuildFlags build;
    auto* c_build = app.add_subcommand("build", "Assemble a TCIM image store from tracks and gridded frames");
    c_build->add_option("--tracks", build.tracks, "Tracks CSV; default $TC_BENCH_DIR/tracks.csv");
    c_build->add_option("--grids", build.grids, "Directory of grid files; default $TC_BENCH_DIR/grids");
    c_build->add_option("--out", build.out, "Output image store; default $TC_BENCH_DIR/images.tcim");
    c_build->add_option("--tolerance-hours", build.config.match_tolerance_hours, "Grid matching tolerance")
        ->capture_default_str();
    c_build->add_option("--variable", build.config.variable, "NetCDF brightness variable")->capture_default_str();
    c_build->add_option("--max-invalid-fraction", build.config.quality.max_invalid_fraction)->capture_default_str();
    c_build->add_option("--protected-size", build.config.quality.protected_size)->capture_default_str();
    c_build->add_option("--fill-kelvin", build.config.quality.fill_kelvin)->capture_default_str();

    SynthFlags syn;
    auto* c_synth = app.add_subcommand("synth", "Generate the cyclone-like toy (tracks CSV + feature store)");
    c_synth->add_option("--out-dir", syn.out_dir, "Output directory; default $TC_BENCH_DIR");
    c_synth->add_option("--storms", syn.storms)->capture_default_str();
    c_synth->add_option("--seed", syn.seed)->capture_default_str();
    c_synth->add_option("--saturation", syn.saturation, "on|off")->capture_default_str();
    c_synth->add_flag("--exact", syn.exact, "Features are an exact linear map of (P, V)");
    c_synth->add_option("--dim", syn.params.dim)->capture_default_str();
    c_synth->add_option("--noise", syn.params.noise_scale)->capture_default_str();
    c_synth->add_option("--b-km-per-deg", syn.params.b_km_per_deg)->capture_default_str();

    ProbeFlags stat;
    std::string stat_readout;
    auto* c_stat = app.add_subcommand("probe-stat", "Static probe: pressure recovery residuals per regime");
    add_probe_flags(c_stat, stat, true);
    c_stat->add_option("--readout", stat_readout, "Write the fitted readout here (default <out>.readout.json)");

    ProbeFlags dyn;
    std::string dyn_readout;
    auto* c_dyn = app.add_subcommand("probe-dyn", "Dynamic probe: finite-difference residuals of the stat readout");
    c_dyn->add_option("--features", dyn.features, "Feature store; default $TC_BENCH_DIR/features.tcfs");
    c_dyn->add_option("--readout", dyn_readout, "Readout artifact written by probe-stat");
    c_dyn->add_option("--out", dyn.out, "Report JSON path (stdout when omitted)");
    c_dyn->add_option("--csv", dyn.csv, "Per-bin CSV path");
    c_dyn->add_option("--bin-width", dyn.config.pressure_bin_width_hpa)->capture_default_str();
    c_dyn->add_option("--dt-hours", dyn.config.dt_hours)->capture_default_str();

    ProbeFlags con;
    std::string wind_features;
    auto* c_con = app.add_subcommand("probe-con", "Manifold probe: latitude ordering of wind at fixed pressure");
    add_probe_flags(c_con, con, true);
    c_con->add_option("--wind-features", wind_features, "Row-aligned store for the wind probe (default --features)");
    c_con->add_option("--lat-low", con.config.lat_low_band_deg)->capture_default_str();
    c_con->add_option("--lat-high", con.config.lat_high_band_deg)->capture_default_str();
    c_con->add_option("--min-count", con.config.con_min_count, "Samples per latitude group per bin")
        ->capture_default_str();
    c_con->add_option("--wind-agencies", con.config.wind_agencies)->delimiter(',');

    CollapseFlags col;
    auto* c_col = app.add_subcommand("collapse", "Per-bin PC1, effective dimensionality and spread");
    c_col->add_option("--features", col.features, "Feature store; default $TC_BENCH_DIR/features.tcfs");
    c_col->add_option("--out", col.out, "Summary JSON path (stdout when omitted)");
    c_col->add_option("--csv", col.csv, "Per-bin CSV path");
    c_col->add_option("--bin-width", col.config.bin_width_hpa)->capture_default_str();
    c_col->add_option("--min-count", col.config.min_count)->capture_default_str();
    c_col->add_option("--max-pairs", col.config.max_pairs)->capture_default_str();
    c_col->add_option("--seed", col.config.seed)->capture_default_str();
    c_col->add_option("--threshold", col.config.regime_threshold_hpa)->capture_default_str();
    c_col->add_flag("--no-balance", col.no_balance, "Fit the PCA on the raw store");

    BoundFlags bnd;
    auto* c_bnd = app.add_subcommand("verify-bounds", "Check recovery/derivative/invariant bounds on random systems");
    c_bnd->add_option("--seed", bnd.seed)->capture_default_str();
    c_bnd->add_option("--systems", bnd.systems)->capture_default_str();
    c_bnd->add_option("--samples", bnd.opt.samples, "Trajectories per regime")->capture_default_str();
    c_bnd->add_option("--steps", bnd.opt.n_steps)->capture_default_str();
    c_bnd->add_option("--dt-hours", bnd.opt.dt_hours)->capture_default_str();
    c_bnd->add_option("--certify-samples", bnd.certify_samples)->capture_default_str();
    c_bnd->add_option("--out", bnd.out, "Report JSON path (stdout when omitted)");

    RolloutFlags rol;
    auto* c_rol = app.add_subcommand("rollout", "Interventional rollout error against its linear-growth bound");
    c_rol->add_option("--seed", rol.seed)->capture_default_str();
    c_rol->add_option("--systems", rol.systems)->capture_default_str();
    c_rol->add_option("--steps", rol.steps)->capture_default_str();
    c_rol->add_option("--dt-hours", rol.dt_hours)->capture_default_str();
    c_rol->add_option("--certify-samples", rol.certify_samples)->capture_default_str();
    c_rol->add_option("--out", rol.out, "Report JSON path (stdout when omitted)");

    std::vector<std::string> report_files;
    auto* c_rep = app.add_subcommand("report", "Validate report JSON files against the schema and summarize them");
    c_rep->add_option("files", report_files, "Report files")->required();

    if (args.size() > 1 && !args[1].empty() && args[1][0] != '-') {
        bool known = false;
        for (const auto* sub : app.get_subcommands({})) known = known || sub->check_name(args[1]);
        if (!known) {
            err << "usage error: unknown subcommand '" << args[1] << "'\nRun with --help for usage.\n";
            return kExitUsage;
        }
    }

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("sprobe");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }

    try {
        if (c_build->parsed()) return cmd_build(build, out);
        if (c_synth->parsed()) return cmd_synth(syn, out);
        if (c_stat->parsed()) return cmd_probe_stat(stat, stat_readout, out);
        if (c_dyn->parsed()) return cmd_probe_dyn(dyn, dyn_readout, out);
        if (c_con->parsed()) return cmd_probe_con(con, wind_features, out);
        if (c_col->parsed()) return cmd_collapse(col, out);
        if (c_bnd->parsed()) return cmd_verify_bounds(bnd, out, err);
        if (c_rol->parsed()) return cmd_rollout(rol, out, err);
        if (c_rep->parsed()) return cmd_report(report_files, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace sprobe::cli
