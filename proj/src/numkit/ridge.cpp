#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sprobe/error.hpp"
#include "sprobe/numkit.hpp"
#include "sprobe/rng.hpp"

namespace sprobe::numkit {

namespace {

void require_finite(const MatrixXd& X, const VectorXd& y, const char* who) {
    if (!X.allFinite()) throw ValidationError(std::string(who) + ": non-finite value in X");
    if (!y.allFinite()) throw ValidationError(std::string(who) + ": non-finite value in y");
}

// Column means computed relative to the first row, so constant columns center to exact zeros.
Eigen::RowVectorXd shifted_mean(const MatrixXd& X) {
    const Eigen::RowVectorXd origin = X.row(0);
    return origin + (X.rowwise() - origin).colwise().mean();
}

double shifted_mean(const VectorXd& y) { return y(0) + (y.array() - y(0)).mean(); }

MatrixXd take_rows(const MatrixXd& X, const std::vector<Eigen::Index>& idx) {
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
    return out;
}

VectorXd take(const VectorXd& y, const std::vector<Eigen::Index>& idx) {
    VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(idx[i]);
    return out;
}

}  // namespace

VectorXd LinearModel::predict(const MatrixXd& X) const {
    return (X * weights).array() + intercept;
}

LinearModel ridge_fit(const MatrixXd& X, const VectorXd& y, double alpha) {
    if (X.rows() < 1 || X.cols() < 1) throw ValidationError("ridge_fit: need n >= 1 and d >= 1");
    if (X.rows() != y.size()) throw ValidationError("ridge_fit: X and y row counts differ");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("ridge_fit: alpha must be finite and >= 0");
    require_finite(X, y, "ridge_fit");

    const Eigen::RowVectorXd x_mean = shifted_mean(X);
    const double y_mean = shifted_mean(y);
    const MatrixXd Xc = X.rowwise() - x_mean;
    const VectorXd yc = y.array() - y_mean;

    MatrixXd gram = Xc.transpose() * Xc;
    gram.diagonal().array() += alpha;
    const VectorXd rhs = Xc.transpose() * yc;

    LinearModel model;
    model.alpha = alpha;
    Eigen::LLT<MatrixXd> llt(gram);
    const bool ok = llt.info() == Eigen::Success && llt.rcond() > 1e-13;
    if (!ok) {
        if (alpha == 0.0)
            throw RankDeficientError("ridge_fit: centered Gram matrix is rank-deficient at alpha = 0 (d = " +
                                     std::to_string(X.cols()) + ", n = " + std::to_string(X.rows()) + ")");
        model.weights = gram.ldlt().solve(rhs);
    } else {
        model.weights = llt.solve(rhs);
    }
    model.intercept = y_mean - x_mean.dot(model.weights);
    return model;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int e = -3; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold: need at least 2 folds");
    if (n < static_cast<std::size_t>(k))
        throw ValidationError("kfold: " + std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(perm);
    std::vector<int> fold(n);
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) fold[perm[pos++]] = f;
    }
    return fold;
}

CvResult ridge_cv(const MatrixXd& X, const VectorXd& y, const std::vector<double>& alpha_grid, int k,
                  std::uint64_t seed) {
    if (alpha_grid.empty()) throw ValidationError("ridge_cv: empty alpha grid");
    for (double a : alpha_grid)
        if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("ridge_cv: alpha grid values must be finite and > 0");
    if (X.rows() != y.size()) throw ValidationError("ridge_cv: X and y row counts differ");
    if (X.cols() < 1) throw ValidationError("ridge_cv: need d >= 1");
    if (k < 2 || X.rows() < k)
        throw ValidationError("ridge_cv: need n >= k >= 2 (n = " + std::to_string(X.rows()) +
                              ", k = " + std::to_string(k) + ")");
    require_finite(X, y, "ridge_cv");

    const auto folds = kfold_assignment(static_cast<std::size_t>(X.rows()), k, seed);
    std::vector<double> total(alpha_grid.size(), 0.0);

    for (int f = 0; f < k; ++f) {
        std::vector<Eigen::Index> train, val;
        for (Eigen::Index i = 0; i < X.rows(); ++i) (folds[static_cast<std::size_t>(i)] == f ? val : train).push_back(i);
        const MatrixXd Xt = take_rows(X, train);
        const VectorXd yt = take(y, train);
        const MatrixXd Xv = take_rows(X, val);
        const VectorXd yv = take(y, val);

        const Eigen::RowVectorXd x_mean = shifted_mean(Xt);
        const double y_mean = shifted_mean(yt);
        const MatrixXd Xc = Xt.rowwise() - x_mean;
        const VectorXd yc = yt.array() - y_mean;

        // One eigendecomposition of the fold's Gram matrix serves the whole grid.
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Xc.transpose() * Xc);
        const VectorXd proj = eig.eigenvectors().transpose() * (Xc.transpose() * yc);
        const VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
        const MatrixXd Xv_rot = (Xv.rowwise() - x_mean) * eig.eigenvectors();

        for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
            const VectorXd coef = proj.array() / (lambda.array() + alpha_grid[a]);
            const VectorXd pred = (Xv_rot * coef).array() + y_mean;
            total[a] += (pred - yv).squaredNorm() / static_cast<double>(yv.size());
        }
    }

    CvResult out;
    out.alphas = alpha_grid;
    out.mean_validation_mse.resize(alpha_grid.size());
    std::size_t best = 0;
    for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
        out.mean_validation_mse[a] = total[a] / k;
        if (a == 0) continue;
        const double e = out.mean_validation_mse[a];
        const double b = out.mean_validation_mse[best];
        const double tie_tol = 1e-12 * std::max(std::abs(b), 1e-300);
        if (e < b - tie_tol || (std::abs(e - b) <= tie_tol && alpha_grid[a] > alpha_grid[best])) best = a;
    }
    out.chosen_alpha = alpha_grid[best];
    out.model = ridge_fit(X, y, out.chosen_alpha);
    return out;
}

}  // namespace sprobe::numkit
