#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <unordered_set>

#include "sprobe/error.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/rng.hpp"

namespace sprobe::numkit {

namespace {

MatrixXd centered(const MatrixXd& X) {
    const Eigen::RowVectorXd origin = X.row(0);
    const MatrixXd shifted = X.rowwise() - origin;
    return shifted.rowwise() - shifted.colwise().mean();
}

}  // namespace

VectorXd Spectrum::project(const MatrixXd& X, Eigen::Index c) const {
    return (X.rowwise() - mean) * components.col(c);
}

Spectrum pca_fit(const MatrixXd& X, Eigen::Index k) {
    if (X.rows() < 2) throw ValidationError("pca_fit: need at least 2 rows");
    if (k < 1 || k > X.cols())
        throw ValidationError("pca_fit: component count " + std::to_string(k) + " outside [1, " +
                              std::to_string(X.cols()) + "]");
    if (!X.allFinite()) throw ValidationError("pca_fit: non-finite input");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const MatrixXd Xc = centered(X);
    const MatrixXd cov = (Xc.transpose() * Xc) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("pca_fit: eigensolver did not converge");

    Spectrum s;
    s.mean = X.row(0) + (X.rowwise() - X.row(0)).colwise().mean();
    s.eigenvalues = eig.eigenvalues().reverse().cwiseMax(0.0);
    s.components.resize(d, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        VectorXd v = eig.eigenvectors().col(d - 1 - c);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        s.components.col(c) = v;
    }
    return s;
}

VectorXd covariance_eigenvalues(const MatrixXd& X) {
    if (X.rows() < 1) throw ValidationError("covariance_eigenvalues: empty input");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const MatrixXd Xc = centered(X);
    // Nonzero spectrum of XcᵀXc equals that of XcXcᵀ; use the smaller side.
    const MatrixXd gram = n < d ? MatrixXd(Xc * Xc.transpose()) : MatrixXd(Xc.transpose() * Xc);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram / static_cast<double>(n), Eigen::EigenvaluesOnly);
    VectorXd out = VectorXd::Zero(d);
    const VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0);
    out.head(ev.size()) = ev;
    return out;
}

double participation_ratio(std::span<const double> eigenvalues) {
    double sum = 0.0, sum_sq = 0.0;
    for (double l : eigenvalues) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("participation_ratio: eigenvalues must be finite and >= 0");
        sum += l;
        sum_sq += l * l;
    }
    if (!(sum > 0.0)) throw ValidationError("participation_ratio: undefined for an all-zero spectrum");
    return sum * sum / sum_sq;
}

double participation_ratio(const VectorXd& eigenvalues) {
    return participation_ratio(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())));
}

double pairwise_spread(const MatrixXd& X, std::size_t max_pairs, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (n < 2) throw ValidationError("pairwise_spread: need at least 2 rows");
    if (max_pairs == 0) throw ValidationError("pairwise_spread: max_pairs must be positive");
    const MatrixXd Xc = centered(X);
    const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;

    auto dist = [&](std::size_t i, std::size_t j) {
        return (Xc.row(static_cast<Eigen::Index>(i)) - Xc.row(static_cast<Eigen::Index>(j))).norm();
    };

    if (total <= max_pairs) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += dist(i, j);
        return sum / static_cast<double>(total);
    }

    // Floyd's algorithm: max_pairs distinct linear pair indices in [0, total).
    Rng rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(max_pairs * 2);
    for (std::uint64_t j = total - max_pairs; j < total; ++j) {
        const std::uint64_t t = rng.index(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<std::uint64_t> picks(chosen.begin(), chosen.end());
    std::sort(picks.begin(), picks.end());

    // Row i owns linear indices [start(i), start(i) + n - 1 - i).
    auto start = [n](std::uint64_t i) { return i * (2 * n - i - 1) / 2; };
    double sum = 0.0;
    std::uint64_t row = 0;
    for (std::uint64_t p : picks) {
        while (start(row + 1) <= p) ++row;
        const std::uint64_t col = row + 1 + (p - start(row));
        sum += dist(static_cast<std::size_t>(row), static_cast<std::size_t>(col));
    }
    return sum / static_cast<double>(picks.size());
}

long long bin_index(double x, double width) { return static_cast<long long>(std::floor(x / width)); }

double bin_center(long long index, double width) { return (static_cast<double>(index) + 0.5) * width; }

std::vector<BinMean> binned_conditional_mean(std::span<const double> x, std::span<const double> y, double bin_width,
                                             std::size_t min_count) {
    if (x.size() != y.size()) throw ValidationError("binned_conditional_mean: x and y lengths differ");
    if (!(bin_width > 0.0)) throw ValidationError("binned_conditional_mean: bin_width must be positive");
    std::map<long long, std::pair<double, std::size_t>> acc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& [sum, count] = acc[bin_index(x[i], bin_width)];
        sum += y[i];
        ++count;
    }
    std::vector<BinMean> out;
    for (const auto& [k, v] : acc)
        if (v.second >= min_count && v.second > 0)
            out.push_back({bin_center(k, bin_width), v.first / static_cast<double>(v.second), v.second});
    return out;
}

std::vector<double> kernel_smooth(std::span<const double> x, std::span<const double> y, std::span<const double> at,
                                  double bandwidth) {
    if (x.size() != y.size()) throw ValidationError("kernel_smooth: x and y lengths differ");
    if (!(bandwidth > 0.0)) throw ValidationError("kernel_smooth: bandwidth must be positive");
    std::vector<double> out;
    out.reserve(at.size());
    for (double a : at) {
        double wsum = 0.0, ysum = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - a) / bandwidth;
            const double w = std::exp(-0.5 * u * u);
            wsum += w;
            ysum += w * y[i];
        }
        out.push_back(wsum > 0.0 ? ysum / wsum : std::nan(""));
    }
    return out;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw ValidationError("mean: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("spearman: lengths differ");
    if (x.size() < 2) return std::nan("");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace sprobe::numkit
