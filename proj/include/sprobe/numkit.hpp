#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sprobe::numkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Affine scalar readout y ≈ weights·x + intercept.
struct LinearModel {
    VectorXd weights;
    double intercept = 0.0;
    double alpha = 0.0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return x.dot(weights) + intercept; }
    VectorXd predict(const MatrixXd& X) const;
};

/// Ridge regression on centered data, solved through the normal equations.
/// Throws RankDeficientError when alpha == 0 and the centered Gram matrix is singular.
LinearModel ridge_fit(const MatrixXd& X, const VectorXd& y, double alpha);

/// {1e-3, 1e-2, ..., 1e6}: one point per decade.
std::vector<double> default_alpha_grid();

/// Fold index (0..k-1) per sample: a seeded permutation cut into k near-equal chunks,
/// the first n % k chunks one element longer.
std::vector<int> kfold_assignment(std::size_t n, int k, std::uint64_t seed);

struct CvResult {
    LinearModel model;  // refit on all rows with the chosen alpha
    double chosen_alpha = 0.0;
    std::vector<double> alphas;
    std::vector<double> mean_validation_mse;  // aligned with alphas
};

/// K-fold selection of alpha by mean per-fold validation MSE; ties go to the larger alpha.
CvResult ridge_cv(const MatrixXd& X, const VectorXd& y, const std::vector<double>& alpha_grid, int k,
                  std::uint64_t seed);

struct Spectrum {
    VectorXd eigenvalues;  // all d, descending, clamped at zero
    MatrixXd components;   // d x k, orthonormal columns
    Eigen::RowVectorXd mean;

    /// Scores of rows of X on component `c`.
    VectorXd project(const MatrixXd& X, Eigen::Index c) const;
};

/// PCA of the 1/n covariance; each component's largest-magnitude entry is made positive.
Spectrum pca_fit(const MatrixXd& X, Eigen::Index k);

/// Eigenvalues of the 1/n covariance of X, descending and clamped at zero.
VectorXd covariance_eigenvalues(const MatrixXd& X);

/// (Σλ)² / Σλ². Throws on negative entries or an all-zero spectrum.
double participation_ratio(std::span<const double> eigenvalues);
double participation_ratio(const VectorXd& eigenvalues);

/// Mean Euclidean distance between rows after centering. Exhaustive when
/// n(n-1)/2 <= max_pairs, otherwise over a seeded sample of distinct pairs.
double pairwise_spread(const MatrixXd& X, std::size_t max_pairs, std::uint64_t seed);

struct BinMean {
    double center = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
};

/// Index of the half-open bin [k·w, (k+1)·w) containing x.
long long bin_index(double x, double width);
double bin_center(long long index, double width);

/// Mean of y within half-open bins of x; bins below min_count are dropped.
std::vector<BinMean> binned_conditional_mean(std::span<const double> x, std::span<const double> y, double bin_width,
                                             std::size_t min_count);

/// Nadaraya-Watson smoother with a Gaussian kernel, evaluated at `at`.
std::vector<double> kernel_smooth(std::span<const double> x, std::span<const double> y, std::span<const double> at,
                                  double bandwidth);

/// Linear-interpolation quantile (q in [0,1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);
double mean(std::span<const double> v);
/// Population standard deviation.
double stddev(std::span<const double> v);

/// Spearman rank correlation with average ranks for ties; NaN if either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace sprobe::numkit
