#include "sprobe/collapse.hpp"

#include <cmath>
#include <map>

#include "sprobe/error.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/probes.hpp"
#include "sprobe/report.hpp"
#include "sprobe/rng.hpp"
#include "sprobe/store.hpp"

namespace sprobe::collapse {

using numkit::MatrixXd;
using nlohmann::json;

namespace {

constexpr std::uint64_t kBalanceStream = 0;
constexpr std::uint64_t kSpreadStreamBase = 1000;

MatrixXd rows_of(const FeatureStore& store, const std::vector<std::size_t>& rows) {
    MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(store.dim()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = store.features.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
    return X;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const CollapseConfig& c) {
    return {{"bin_width_hpa", c.bin_width_hpa}, {"min_count", c.min_count},   {"max_pairs", c.max_pairs},
            {"seed", c.seed},                   {"regime_threshold_hpa", c.regime_threshold_hpa},
            {"balance", c.balance},             {"pca_population", c.balance ? "balanced_store" : "full_store"}};
}

CollapseReport collapse_report(const FeatureStore& store, const CollapseConfig& config) {
    validate(store);
    if (store.rows() == 0) throw ValidationError("collapse_report: empty store");
    if (store.dim() == 0) throw ValidationError("collapse_report: zero-dimensional features");
    if (!(config.bin_width_hpa > 0.0)) throw ValidationError("collapse_report: bin width must be positive");

    std::vector<std::size_t> rows(store.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    if (config.balance) {
        std::vector<Regime> labels;
        for (const auto& m : store.meta) labels.push_back(regime_of(m.pressure_hpa, config.regime_threshold_hpa));
        rows = probes::regime_balance(labels, derive_seed(config.seed, kBalanceStream));
    }
    if (rows.size() < 2) throw ValidationError("collapse_report: need at least 2 rows for PCA");

    const MatrixXd all = rows_of(store, rows);
    const auto pca = numkit::pca_fit(all, 1);

    std::map<long long, std::vector<std::size_t>> by_bin;
    for (std::size_t i = 0; i < rows.size(); ++i)
        by_bin[numkit::bin_index(store.meta[rows[i]].pressure_hpa, config.bin_width_hpa)].push_back(i);

    CollapseReport out;
    out.pca_rows = rows.size();
    out.pca_balanced = config.balance;
    out.store_digest = store.digest;
    for (const auto& [k, members] : by_bin) {
        if (members.size() < config.min_count || members.size() < 2) continue;
        MatrixXd X(static_cast<Eigen::Index>(members.size()), all.cols());
        std::vector<double> p(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            X.row(static_cast<Eigen::Index>(i)) = all.row(static_cast<Eigen::Index>(members[i]));
            p[i] = store.meta[rows[members[i]]].pressure_hpa;
        }
        const numkit::VectorXd score = pca.project(X, 0);
        std::vector<double> s(score.data(), score.data() + score.size());

        BinDiagnostics b;
        b.bin_center_hpa = numkit::bin_center(k, config.bin_width_hpa);
        b.count = members.size();
        b.pc1_mean = numkit::mean(s);
        b.pc1_std = numkit::stddev(s);
        b.pc1_pressure_spearman = numkit::spearman(s, p);
        b.abs_spearman = std::abs(b.pc1_pressure_spearman);
        const auto ev = numkit::covariance_eigenvalues(X);
        if (ev.sum() > 0.0) {
            b.d_eff = numkit::participation_ratio(ev);
        } else {
            b.d_eff = std::nan("");
            b.degenerate = true;
        }
        b.spread = numkit::pairwise_spread(X, config.max_pairs,
                                           derive_seed(config.seed, kSpreadStreamBase + static_cast<std::uint64_t>(k)));
        out.bins.push_back(b);
    }
    if (out.bins.empty())
        throw ValidationError("collapse_report: no pressure bin reaches min_count = " +
                              std::to_string(config.min_count) + "; try a smaller min_count");

    auto summarize = [&](Regime regime) {
        RegimeCollapse rc;
        double deff_sum = 0.0, spear_sum = 0.0;
        std::size_t deff_n = 0, spear_n = 0;
        double spread_sum = 0.0;
        for (const auto& b : out.bins) {
            if (regime_of(b.bin_center_hpa, config.regime_threshold_hpa) != regime) continue;
            ++rc.bins;
            spread_sum += b.spread;
            if (!b.degenerate) {
                deff_sum += b.d_eff;
                ++deff_n;
            }
            if (std::isfinite(b.abs_spearman)) {
                spear_sum += b.abs_spearman;
                ++spear_n;
            }
        }
        rc.mean_d_eff = deff_n ? deff_sum / static_cast<double>(deff_n) : std::nan("");
        rc.mean_spread = rc.bins ? spread_sum / static_cast<double>(rc.bins) : std::nan("");
        rc.mean_abs_spearman = spear_n ? spear_sum / static_cast<double>(spear_n) : std::nan("");
        return rc;
    };
    out.moderate = summarize(Regime::Moderate);
    out.intense = summarize(Regime::Intense);
    out.d_eff_relative_drop = (out.moderate.mean_d_eff - out.intense.mean_d_eff) / out.moderate.mean_d_eff;
    out.spread_relative_drop = (out.moderate.mean_spread - out.intense.mean_spread) / out.moderate.mean_spread;
    return out;
}

std::string bins_csv(const CollapseReport& r) {
    std::string out = "bin_center_hpa,count,pc1_mean,pc1_std,pc1_spearman,d_eff,spread\n";
    for (const auto& b : r.bins) {
        out += format_double(b.bin_center_hpa) + ',' + std::to_string(b.count) + ',' + format_double(b.pc1_mean) +
               ',' + format_double(b.pc1_std) + ',' + format_double(b.pc1_pressure_spearman) + ',' +
               format_double(b.d_eff) + ',' + format_double(b.spread) + '\n';
    }
    return out;
}

json to_json(const CollapseReport& r, const CollapseConfig& config) {
    json per_bin = json::array();
    for (const auto& b : r.bins)
        per_bin.push_back({{"bin_center_hpa", b.bin_center_hpa},
                           {"count", b.count},
                           {"statistic", number_or_null(b.d_eff)},
                           {"pc1_mean", b.pc1_mean},
                           {"pc1_std", b.pc1_std},
                           {"pc1_spearman", number_or_null(b.pc1_pressure_spearman)},
                           {"abs_spearman", number_or_null(b.abs_spearman)},
                           {"d_eff", number_or_null(b.d_eff)},
                           {"spread", b.spread},
                           {"degenerate", b.degenerate}});
    auto regime = [](const RegimeCollapse& rc) {
        return json{{"count", rc.bins},
                    {"mean_d_eff", number_or_null(rc.mean_d_eff)},
                    {"mean_spread", number_or_null(rc.mean_spread)},
                    {"mean_abs_spearman", number_or_null(rc.mean_abs_spearman)}};
    };
    json per_regime = json::object();
    if (r.moderate.bins) per_regime["Moderate"] = regime(r.moderate);
    if (r.intense.bins) per_regime["Intense"] = regime(r.intense);
    return json{{"schema_version", std::string(kReportSchemaVersion)},
                {"probe_id", "collapse"},
                {"config", to_json(config)},
                {"provenance",
                 {{"split_seed", 0u},
                  {"balance_seed", config.seed},
                  {"cv_seed", 0u},
                  {"split_policy", "none"},
                  {"store_digest", r.store_digest}}},
                {"per_regime", per_regime},
                {"per_bin", per_bin},
                {"probe_value", number_or_null(r.d_eff_relative_drop)},
                {"diagnostics",
                 {{"probe_value_meaning", "relative drop of mean d_eff from Moderate to Intense bins"},
                  {"d_eff_relative_drop", number_or_null(r.d_eff_relative_drop)},
                  {"spread_relative_drop", number_or_null(r.spread_relative_drop)},
                  {"pca_rows", r.pca_rows},
                  {"pca_balanced", r.pca_balanced}}}};
}

}  // namespace sprobe::collapse
