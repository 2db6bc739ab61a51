#pragma once

// Reference implementations written independently of the library code paths:
// dense QR / SVD / explicit loops instead of normal equations and eigen tricks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace sprobe::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Affine {
    VectorXd w;
    double b = 0.0;
};

/// Closed-form ridge: w = (Xc'Xc + alpha I)^-1 Xc'yc with plain two-pass means.
inline Affine ridge_normal_equations(const MatrixXd& X, const VectorXd& y, double alpha) {
    const Eigen::RowVectorXd mx = X.colwise().sum() / static_cast<double>(X.rows());
    const double my = y.sum() / static_cast<double>(y.size());
    const MatrixXd Xc = X.rowwise() - mx;
    const VectorXd yc = y.array() - my;
    MatrixXd G = Xc.transpose() * Xc + alpha * MatrixXd::Identity(X.cols(), X.cols());
    Affine a;
    a.w = G.fullPivLu().solve(Xc.transpose() * yc);
    a.b = my - mx.dot(a.w);
    return a;
}

/// Same estimator through the augmented least-squares system [Xc; sqrt(alpha) I] w = [yc; 0].
inline Affine ridge_augmented_qr(const MatrixXd& X, const VectorXd& y, double alpha) {
    const Eigen::Index n = X.rows(), d = X.cols();
    const Eigen::RowVectorXd mx = X.colwise().mean();
    const double my = y.mean();
    MatrixXd M(n + d, d);
    M.topRows(n) = X.rowwise() - mx;
    M.bottomRows(d) = std::sqrt(alpha) * MatrixXd::Identity(d, d);
    VectorXd rhs = VectorXd::Zero(n + d);
    rhs.head(n) = y.array() - my;
    Affine a;
    a.w = M.colPivHouseholderQr().solve(rhs);
    a.b = my - mx.dot(a.w);
    return a;
}

/// Exhaustive K-fold search with the given fold labels; ties go to the larger alpha.
inline double exhaustive_cv_alpha(const MatrixXd& X, const VectorXd& y, const std::vector<double>& grid,
                                  const std::vector<int>& fold, int k, std::vector<double>* mse_out = nullptr) {
    std::vector<double> mse(grid.size(), 0.0);
    for (std::size_t a = 0; a < grid.size(); ++a) {
        for (int f = 0; f < k; ++f) {
            std::vector<Eigen::Index> tr, va;
            for (Eigen::Index i = 0; i < X.rows(); ++i) (fold[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
            MatrixXd Xt(static_cast<Eigen::Index>(tr.size()), X.cols());
            VectorXd yt(static_cast<Eigen::Index>(tr.size()));
            for (std::size_t i = 0; i < tr.size(); ++i) {
                Xt.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
                yt(static_cast<Eigen::Index>(i)) = y(tr[i]);
            }
            const Affine m = ridge_augmented_qr(Xt, yt, grid[a]);
            double s = 0.0;
            for (auto i : va) {
                const double e = X.row(i).dot(m.w) + m.b - y(i);
                s += e * e;
            }
            mse[a] += s / static_cast<double>(va.size()) / k;
        }
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < grid.size(); ++a)
        if (mse[a] < mse[best] || (mse[a] == mse[best] && grid[a] > grid[best])) best = a;
    if (mse_out) *mse_out = mse;
    return grid[best];
}

/// Covariance spectrum through the singular values of the centered data.
inline VectorXd covariance_spectrum_svd(const MatrixXd& X) {
    const MatrixXd Xc = X.rowwise() - X.colwise().mean();
    Eigen::JacobiSVD<MatrixXd> svd(Xc);
    VectorXd s = svd.singularValues().array().square() / static_cast<double>(X.rows());
    VectorXd out = VectorXd::Zero(X.cols());
    out.head(s.size()) = s;
    return out;
}

inline double participation_ratio(const VectorXd& lambda) {
    const double s = lambda.sum();
    return s * s / lambda.squaredNorm();
}

/// Mean distance over every unordered pair.
inline double exhaustive_spread(const MatrixXd& X) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            total += (X.row(i) - X.row(j)).norm();
            ++pairs;
        }
    return pairs ? total / static_cast<double>(pairs) : std::numeric_limits<double>::quiet_NaN();
}

/// Pearson correlation of average ranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0.0, equal = 0.0;
            for (double w : v) {
                less += w < v[i] ? 1.0 : 0.0;
                equal += w == v[i] ? 1.0 : 0.0;
            }
            r[i] = less + (equal + 1.0) / 2.0;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i] / n;
        my += ry[i] / n;
    }
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace sprobe::oracle
