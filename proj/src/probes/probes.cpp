#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "sprobe/error.hpp"
#include "sprobe/probes.hpp"
#include "sprobe/rng.hpp"
#include "sprobe/store.hpp"

namespace sprobe::probes {

using numkit::MatrixXd;
using numkit::VectorXd;

namespace {

// Independent random streams for the train, test and pair balancing steps.
constexpr std::uint64_t kTrainBalanceStream = 0;
constexpr std::uint64_t kTestBalanceStream = 1;
constexpr std::uint64_t kPairBalanceStream = 2;

struct SideRows {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

SideRows rows_by_side(const FeatureStore& store, const SplitAssignment& split,
                      const std::vector<bool>* eligible = nullptr) {
    SideRows out;
    for (std::size_t i = 0; i < store.rows(); ++i) {
        if (eligible && !(*eligible)[i]) continue;
        (split.at(store.meta[i].storm_id) == SplitSide::Train ? out.train : out.test).push_back(i);
    }
    return out;
}

std::vector<std::size_t> balance_rows(const FeatureStore& store, const std::vector<std::size_t>& rows,
                                      double threshold, std::uint64_t seed, const char* what) {
    std::vector<Regime> labels;
    labels.reserve(rows.size());
    for (auto r : rows) labels.push_back(regime_of(store.meta[r].pressure_hpa, threshold));
    std::vector<std::size_t> keep;
    try {
        keep = regime_balance(labels, seed);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
    std::vector<std::size_t> out;
    out.reserve(keep.size());
    for (auto k : keep) out.push_back(rows[k]);
    return out;
}

MatrixXd design(const FeatureStore& store, const std::vector<std::size_t>& rows) {
    MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(store.dim()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = store.features.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
    return X;
}

VectorXd pressures(const FeatureStore& store, const std::vector<std::size_t>& rows) {
    VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = store.meta[rows[i]].pressure_hpa;
    return y;
}

VectorXd winds(const FeatureStore& store, const std::vector<std::size_t>& rows) {
    VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = store.meta[rows[i]].wind_kt;
    return y;
}

RegimeSummary summarize(const std::vector<double>& v) {
    RegimeSummary s;
    s.count = v.size();
    s.mean = numkit::mean(v);
    s.median = numkit::quantile(v, 0.5);
    s.p90 = numkit::quantile(v, 0.9);
    return s;
}

// Residuals keyed by regime and by pressure bin (median statistic).
void aggregate(ProbeReport& report, const std::vector<double>& residual, const std::vector<double>& pressure,
               const ProbeConfig& config) {
    std::map<Regime, std::vector<double>> by_regime;
    std::map<long long, std::vector<double>> by_bin;
    for (std::size_t i = 0; i < residual.size(); ++i) {
        by_regime[regime_of(pressure[i], config.regime_threshold_hpa)].push_back(residual[i]);
        by_bin[numkit::bin_index(pressure[i], config.pressure_bin_width_hpa)].push_back(residual[i]);
    }
    for (const auto& [regime, v] : by_regime) report.per_regime[regime] = summarize(v);
    for (const auto& [k, v] : by_bin)
        report.per_bin.push_back(
            {numkit::bin_center(k, config.pressure_bin_width_hpa), numkit::quantile(v, 0.5), v.size()});
}

Provenance provenance_of(const FeatureStore& store, const SplitAssignment& split, const ProbeConfig& config) {
    Provenance p;
    p.split_seed = split.seed;
    p.balance_seed = config.seeds.balance;
    p.cv_seed = config.seeds.cv;
    p.split_policy = std::string(to_string(split.policy));
    if (split.policy == SplitPolicy::AgencyHoldout) p.split_policy += ":" + split.held_out_agency;
    p.store_digest = store.digest;
    return p;
}

std::string lower(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

}  // namespace

StaticResult probe_static(const FeatureStore& store, const SplitAssignment& split, const ProbeConfig& config) {
    validate(config);
    validate(store);
    const auto sides = rows_by_side(store, split);
    const auto train = balance_rows(store, sides.train, config.regime_threshold_hpa,
                                    derive_seed(config.seeds.balance, kTrainBalanceStream), "train rows");
    const auto test = balance_rows(store, sides.test, config.regime_threshold_hpa,
                                   derive_seed(config.seeds.balance, kTestBalanceStream), "test rows");

    const MatrixXd Xtr = design(store, train);
    const VectorXd ptr = pressures(store, train);
    auto cv = numkit::ridge_cv(Xtr, ptr, config.alpha_grid, config.cv_folds, config.seeds.cv);

    const double sigma = numkit::stddev(std::span<const double>(ptr.data(), static_cast<std::size_t>(ptr.size())));
    if (!(sigma > 0.0)) throw ValidationError("probe_static: pressure has zero spread over the balanced train rows");

    const VectorXd pred = cv.model.predict(design(store, test));
    std::vector<double> xi(test.size()), p(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        p[i] = store.meta[test[i]].pressure_hpa;
        xi[i] = std::abs(pred(static_cast<Eigen::Index>(i)) - p[i]) / sigma;
    }

    StaticResult out;
    auto& r = out.report;
    r.probe_id = ProbeId::Stat;
    r.chosen_alpha = cv.chosen_alpha;
    r.sigma_normalizer = sigma;
    r.provenance = provenance_of(store, split, config);
    aggregate(r, xi, p, config);
    r.diagnostics = {{"train_rows", train.size()},
                     {"test_rows", test.size()},
                     {"sigma_population", "balanced_train_rows"},
                     {"cv_mean_validation_mse", cv.mean_validation_mse},
                     {"intercept_only_reading", "xi_stat = MAE/sigma; equals 1 only for specific distributions"}};
    validate(r);
    out.readout = cv.model;
    return out;
}

std::vector<DynamicPair> dynamic_residuals(const FeatureStore& store, const std::vector<std::size_t>& rows,
                                           const numkit::LinearModel& readout, double dt_hours) {
    if (readout.weights.size() != static_cast<Eigen::Index>(store.dim()))
        throw ValidationError("dynamic probe: readout has " + std::to_string(readout.weights.size()) +
                              " weights but the store has dimension " + std::to_string(store.dim()));
    const auto step = static_cast<UnixSeconds>(std::llround(dt_hours * 3600.0));
    std::map<std::string, std::vector<std::size_t>> by_storm;
    for (auto r : rows) by_storm[store.meta[r].storm_id].push_back(r);

    std::vector<DynamicPair> pairs;
    for (auto& [id, rs] : by_storm) {
        std::stable_sort(rs.begin(), rs.end(),
                         [&](std::size_t a, std::size_t b) { return store.meta[a].timestamp < store.meta[b].timestamp; });
        for (std::size_t k = 0; k + 1 < rs.size(); ++k) {
            const auto& m0 = store.meta[rs[k]];
            const auto& m1 = store.meta[rs[k + 1]];
            if (m1.timestamp - m0.timestamp != step) continue;
            const Eigen::RowVectorXd dz = (store.features.row(static_cast<Eigen::Index>(rs[k + 1])) -
                                           store.features.row(static_cast<Eigen::Index>(rs[k])))
                                              .cast<double>();
            const double dp = m1.pressure_hpa - m0.pressure_hpa;
            pairs.push_back({rs[k], rs[k + 1], m0.pressure_hpa, std::abs(dz.dot(readout.weights) - dp)});
        }
    }
    return pairs;
}

ProbeReport probe_dynamic(const FeatureStore& store, const SplitAssignment& split,
                          const numkit::LinearModel& readout, double sigma_normalizer, const ProbeConfig& config) {
    validate(config);
    validate(store);
    const auto sides = rows_by_side(store, split);
    const auto pairs = dynamic_residuals(store, sides.test, readout, config.dt_hours);
    if (pairs.empty())
        throw ValidationError("probe_dynamic: no consecutive test pairs exactly " + format_double(config.dt_hours) +
                              " h apart");

    std::vector<Regime> labels;
    for (const auto& pr : pairs) labels.push_back(regime_of(pr.earlier_pressure, config.regime_threshold_hpa));
    std::vector<std::size_t> keep;
    try {
        keep = regime_balance(labels, derive_seed(config.seeds.balance, kPairBalanceStream));
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("probe_dynamic pairs: ") + e.what());
    }
    std::vector<double> xi, p;
    for (auto k : keep) {
        xi.push_back(pairs[k].residual);
        p.push_back(pairs[k].earlier_pressure);
    }

    ProbeReport r;
    r.probe_id = ProbeId::Dyn;
    r.chosen_alpha = readout.alpha;
    r.sigma_normalizer = sigma_normalizer;
    r.provenance = provenance_of(store, split, config);
    aggregate(r, xi, p, config);
    r.diagnostics = {{"pairs_total", pairs.size()},
                     {"pairs_balanced", keep.size()},
                     {"residual_units", "hPa per step"},
                     {"dt_hours", config.dt_hours}};
    validate(r);
    return r;
}

ProbeReport probe_manifold(const FeatureStore& pressure_store, const FeatureStore& wind_store,
                           const SplitAssignment& split, const ProbeConfig& config) {
    validate(config);
    validate(pressure_store);
    validate(wind_store);
    if (pressure_store.meta != wind_store.meta)
        throw ValidationError("probe_manifold: pressure and wind stores are not row-aligned to the same metadata");
    const auto& meta = pressure_store.meta;

    std::vector<bool> eligible(meta.size(), true);
    if (!config.wind_agencies.empty()) {
        std::vector<std::string> allowed;
        for (const auto& a : config.wind_agencies) allowed.push_back(lower(a));
        for (std::size_t i = 0; i < meta.size(); ++i)
            eligible[i] = std::find(allowed.begin(), allowed.end(), lower(meta[i].agency)) != allowed.end();
    }
    const auto sides = rows_by_side(pressure_store, split, &eligible);
    if (sides.train.empty() || sides.test.empty())
        throw ValidationError("probe_manifold: no train or test rows from the configured wind agencies");
    const auto train = balance_rows(pressure_store, sides.train, config.regime_threshold_hpa,
                                    derive_seed(config.seeds.balance, kTrainBalanceStream), "train rows");
    const auto test = balance_rows(pressure_store, sides.test, config.regime_threshold_hpa,
                                   derive_seed(config.seeds.balance, kTestBalanceStream), "test rows");

    const VectorXd ptr = pressures(pressure_store, train);
    const double sigma = numkit::stddev(std::span<const double>(ptr.data(), static_cast<std::size_t>(ptr.size())));
    if (!(sigma > 0.0)) throw ValidationError("probe_manifold: pressure has zero spread over the balanced train rows");
    auto p_cv = numkit::ridge_cv(design(pressure_store, train), ptr, config.alpha_grid, config.cv_folds,
                                 config.seeds.cv);
    auto v_cv = numkit::ridge_cv(design(wind_store, train), winds(wind_store, train), config.alpha_grid,
                                 config.cv_folds, config.seeds.cv);

    const VectorXd p_hat = p_cv.model.predict(design(pressure_store, test));
    const VectorXd v_hat = v_cv.model.predict(design(wind_store, test));
    double p_abs_err = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i)
        p_abs_err += std::abs(p_hat(static_cast<Eigen::Index>(i)) - meta[test[i]].pressure_hpa);
    p_abs_err /= static_cast<double>(test.size());

    struct Group {
        double v_true = 0.0, v_pred = 0.0;
        std::size_t n = 0;
    };
    std::map<long long, std::pair<Group, Group>> bins;  // (low-lat, high-lat)
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& m = meta[test[i]];
        const double alat = std::abs(m.lat);
        Group* g = nullptr;
        auto& slot = bins[numkit::bin_index(m.pressure_hpa, config.pressure_bin_width_hpa)];
        if (alat < config.lat_low_band_deg) g = &slot.first;
        else if (alat > config.lat_high_band_deg) g = &slot.second;
        if (!g) continue;
        g->v_true += m.wind_kt;
        g->v_pred += v_hat(static_cast<Eigen::Index>(i));
        ++g->n;
    }

    ProbeReport r;
    r.probe_id = ProbeId::Con;
    r.chosen_alpha = v_cv.chosen_alpha;
    r.sigma_normalizer = sigma;
    r.provenance = provenance_of(pressure_store, split, config);
    r.provenance.aux_store_digest = wind_store.digest;

    nlohmann::json table = nlohmann::json::array();
    std::size_t populated = 0, excluded_nonpositive = 0;
    std::map<Regime, std::vector<std::pair<double, std::size_t>>> by_regime;
    for (const auto& [k, groups] : bins) {
        const auto& [low, high] = groups;
        const double center = numkit::bin_center(k, config.pressure_bin_width_hpa);
        nlohmann::json row = {{"bin_center_hpa", center}, {"n_low", low.n}, {"n_high", high.n}};
        if (low.n < config.con_min_count || high.n < config.con_min_count || low.n == 0 || high.n == 0) {
            row["status"] = "unpopulated";
            table.push_back(row);
            continue;
        }
        ++populated;
        const double dv = low.v_true / static_cast<double>(low.n) - high.v_true / static_cast<double>(high.n);
        const double dv_hat = low.v_pred / static_cast<double>(low.n) - high.v_pred / static_cast<double>(high.n);
        row["delta_v_true"] = dv;
        row["delta_v_pred"] = dv_hat;
        if (!(dv > 0.0)) {
            ++excluded_nonpositive;
            row["status"] = "nonpositive_separation";
            table.push_back(row);
            continue;
        }
        const double psi = std::abs(dv - dv_hat) / dv;
        const std::size_t count = low.n + high.n;
        row["psi_con"] = psi;
        row["status"] = "used";
        table.push_back(row);
        r.per_bin.push_back({center, psi, count});
        by_regime[regime_of(center, config.regime_threshold_hpa)].emplace_back(psi, count);
    }
    if (populated == 0)
        throw ValidationError("probe_manifold: no pressure bin has both latitude groups populated");

    for (const auto& [regime, entries] : by_regime) {
        double wsum = 0.0, total = 0.0;
        std::vector<double> values;
        for (const auto& [psi, count] : entries) {
            wsum += psi * static_cast<double>(count);
            total += static_cast<double>(count);
            values.push_back(psi);
        }
        RegimeSummary s;
        s.mean = wsum / total;
        s.median = numkit::quantile(values, 0.5);
        s.p90 = numkit::quantile(values, 0.9);
        s.count = static_cast<std::size_t>(total);
        r.per_regime[regime] = s;
    }
    r.diagnostics = {{"bins", table},
                     {"populated_bins", populated},
                     {"excluded_nonpositive_bins", excluded_nonpositive},
                     {"aggregation", "count_weighted_mean_over_bins"},
                     {"pressure_probe", {{"alpha", p_cv.chosen_alpha}, {"mean_abs_error_hpa", p_abs_err}}},
                     {"wind_probe", {{"alpha", v_cv.chosen_alpha}}},
                     {"train_rows", train.size()},
                     {"test_rows", test.size()}};
    validate(r);
    return r;
}

}  // namespace sprobe::probes
