#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sprobe/core.hpp"
#include "sprobe/rng.hpp"

namespace sprobe::synth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Constraint {
    std::string name;
    std::function<double(const VectorXd& y)> fn;
    double lipschitz = 0.0;
};

/// Regime family of bounded vector fields with an observation map and invariants.
/// Time is measured in hours throughout.
struct SyntheticSystem {
    std::size_t m = 0;
    std::vector<VectorXd> regimes;  // regime parameters
    std::function<VectorXd(const VectorXd& mu, const VectorXd& y)> vector_field;
    double K = 0.0;  // certified bound on ||vector_field||
    std::function<VectorXd(const VectorXd& y)> obs;  // identity when empty
    std::vector<Constraint> constraints;
    VectorXd box_lo, box_hi;
    // Draws an initial state on the constraint manifold, well inside the box.
    std::function<VectorXd(Rng& rng, const VectorXd& mu)> sample_initial;

    bool in_box(const VectorXd& y) const;
    VectorXd observe(const VectorXd& y) const { return obs ? obs(y) : y; }
};

/// Spot-checks ||f|| <= K on `samples` box points per regime and that every
/// constraint vanishes (to 1e-8) along short trajectories from sample_initial.
void validate(const SyntheticSystem& s, std::uint64_t seed, std::size_t samples = 2000);

/// States at t = 0, dt, ..., n_steps*dt. Classical RK4 with `substeps` (>= 8) per dt.
/// Throws ValidationError when the state leaves the box or becomes non-finite.
std::vector<VectorXd> simulate_trajectory(const SyntheticSystem& s, std::size_t regime, const VectorXd& y0,
                                          std::size_t n_steps, double dt_hours, std::size_t substeps = 8);

/// Same integration, but every substep state is returned (n_steps*substeps + 1 states).
std::vector<VectorXd> simulate_dense(const SyntheticSystem& s, std::size_t regime, const VectorXd& y0,
                                     std::size_t n_steps, double dt_hours, std::size_t substeps = 8);

struct Residual {
    std::function<VectorXd(const VectorXd& mu, const VectorXd& y)> value;
    // Optional analytic Jacobian (d x m); finite differences are used when empty.
    std::function<MatrixXd(const VectorXd& mu, const VectorXd& y)> jacobian;
    double eps_bar = 0.0;    // sup ||value||
    double delta_bar = 0.0;  // sup ||jacobian||_2
};

/// Monotone squashing of one state coordinate toward a knee.
/// below: y < knee maps to knee - scale*tanh((knee - y)/scale); above mirrors it.
struct Saturation {
    std::size_t coordinate = 0;
    double knee = 0.0;
    double scale = 1.0;
    bool below = true;
};

struct EncoderSpec {
    MatrixXd A;  // d x m, injective
    Residual residual;
    std::vector<Saturation> saturation;

    std::size_t d() const { return static_cast<std::size_t>(A.rows()); }
    std::size_t m() const { return static_cast<std::size_t>(A.cols()); }
};

VectorXd saturate(const std::vector<Saturation>& sat, const VectorXd& y);
/// Derivative of each saturated coordinate (1 where not saturated).
VectorXd saturation_slope(const std::vector<Saturation>& sat, const VectorXd& y);

/// z = A s(y) + residual(mu, y).
VectorXd encode(const EncoderSpec& spec, const VectorXd& mu, const VectorXd& y);

/// Residual Jacobian at (mu, y): analytic when provided, otherwise central differences.
MatrixXd residual_jacobian(const Residual& r, const VectorXd& mu, const VectorXd& y);

/// Monte-Carlo suprema of ||value|| and ||jacobian|| over uniform box samples
/// for every regime, inflated by `inflation`. Returns (eps_bar, delta_bar).
std::pair<double, double> certify(const Residual& r, const SyntheticSystem& s, std::size_t samples,
                                  std::uint64_t seed, double inflation = 1.1);

/// sigma_min(A) > 0 and Monte-Carlo residual magnitude / finite-difference Jacobian
/// norm within the declared bounds (tolerance 1e-6).
void validate(const EncoderSpec& spec, const SyntheticSystem& s, std::uint64_t seed, std::size_t samples = 2000);

struct LeftInverse {
    MatrixXd L;         // m x d, L*A = I
    double norm = 0.0;  // ||L||_2 = 1 / sigma_min(A)
};

/// Moore-Penrose left inverse via SVD. Throws RankDeficientError for non-injective A.
LeftInverse left_inverse(const MatrixXd& A);

struct BoundEntry {
    double empirical = 0.0;      // sup over regimes of the per-regime mean
    double empirical_max = 0.0;  // largest single-state value
    double theoretical = 0.0;
    double margin() const { return theoretical - empirical; }
    double worst_margin() const { return theoretical - empirical_max; }
};

struct Witness {
    std::string quantity;
    std::size_t regime = 0;
    std::size_t sample = 0;
    std::size_t state = 0;
    double value = 0.0;
    double bound = 0.0;
};

struct BoundReport {
    BoundEntry stat;
    BoundEntry dyn;
    BoundEntry con;  // zeros when the system has no constraints
    double l_norm = 0.0;
    double eps_bar = 0.0;
    double delta_bar = 0.0;
    double K = 0.0;
    double lambda = 0.0;
    std::size_t states = 0;
    Witness worst;  // state with the smallest pointwise margin
    double worst_margin = 0.0;
};

struct BoundOptions {
    std::size_t samples = 16;  // trajectories per regime
    std::size_t n_steps = 10;
    double dt_hours = 0.1;
    std::size_t substeps = 8;
    double tolerance = 1e-6;
};

/// Empirical recovery / derivative / invariant residuals against their bounds.
/// Never throws on a violated bound; see verify_bounds.
BoundReport evaluate_bounds(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                            const BoundOptions& opt, std::uint64_t seed);

/// evaluate_bounds, then throws BoundViolation carrying the witness if any
/// pointwise residual exceeds its bound by more than the tolerance.
BoundReport verify_bounds(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                          const BoundOptions& opt, std::uint64_t seed);

struct RolloutReport {
    std::vector<double> times;   // t_n - t*
    std::vector<double> errors;  // ||L(z_n - z_0) - (y_n - y_0)||
    std::vector<double> bounds;  // eps_stat + eps_dyn * t
    double eps_stat = 0.0;
    double eps_dyn = 0.0;
    double slope = 0.0;  // least-squares slope of error vs time through the origin
    double min_margin = 0.0;
    std::size_t worst_step = 0;
};

RolloutReport rollout_report(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                             std::size_t regime, const VectorXd& y_star, std::size_t n_steps, double dt_hours,
                             std::size_t substeps = 8);

/// rollout_report, throwing BoundViolation with the witness step when
/// error > bound + tolerance.
RolloutReport interventional_rollout(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                                     std::size_t regime, const VectorXd& y_star, std::size_t n_steps,
                                     double dt_hours, double tolerance = 1e-6);

/// Random regime family: f_mu(y) = s * Pi * tanh(W y + b_mu), where Pi projects out a
/// unit direction c, so the linear invariant lambda * c.y is conserved.
/// The box contains every trajectory of duration <= horizon_hours.
SyntheticSystem random_system(std::uint64_t seed, double horizon_hours);

/// Random injective A (d in [m+1, m+5]) with residual a * u (.) sin(Omega y + Phi mu),
/// certified by Monte Carlo.
EncoderSpec random_encoder(const SyntheticSystem& s, std::uint64_t seed, std::size_t certify_samples = 100000);

struct SuiteEntry {
    std::uint64_t system_seed = 0;
    std::uint64_t encoder_seed = 0;
    std::size_t m = 0;
    std::size_t d = 0;
    BoundReport bounds;
};

/// evaluate_bounds over `systems` random (system, encoder) pairs derived from `seed`.
std::vector<SuiteEntry> bound_suite(std::uint64_t seed, std::size_t systems, const BoundOptions& opt,
                                    std::size_t certify_samples = 100000);

struct RolloutEntry {
    std::uint64_t system_seed = 0;
    std::uint64_t encoder_seed = 0;
    std::size_t regime = 0;
    RolloutReport rollout;
};

/// One interventional rollout per regime for each random (system, encoder) pair.
std::vector<RolloutEntry> rollout_suite(std::uint64_t seed, std::size_t systems, std::size_t n_steps,
                                        double dt_hours, std::size_t certify_samples = 100000);

// ---- cyclone-like toy -----------------------------------------------------

inline constexpr double kKnotsPerMs = 1.943844;

/// f ~ 15e-5 * sin(|lat|) in rad/s.
double coriolis(double lat_deg);

/// Positive root of V^2 + f*B*|lat|*V = c * deficit (V in m/s, B in km/degree).
double gradient_wind_ms(double deficit_hpa, double lat_deg, double b_km_per_deg, double c);

struct ToyParams {
    double env_pressure_hpa = 1024.0;
    double max_deficit_hpa = 152.0;
    double min_peak_deficit_hpa = 15.0;
    double b_km_per_deg = 10.0;
    double wind_coeff = 61.3;  // c, (m/s)^2 per hPa
    double lat_min_deg = 3.0;
    double lat_max_deg = 40.0;
    int min_ramp_steps = 6;
    int max_ramp_steps = 24;
    int min_decay_steps = 6;
    int max_decay_steps = 24;
    double dt_hours = 3.0;
    UnixSeconds start = 946684800;  // 2000-01-01T00:00:00Z

    std::size_t dim = 32;
    std::size_t nuisance_rank = 8;
    double nuisance_scale = 2.0;
    double noise_scale = 0.01;
    // Nuisance directions 2..q shrink to this fraction where the encoder saturates.
    double collapse_floor = 0.2;

    bool saturation = true;
    double pressure_knee_hpa = 980.0;
    double pressure_scale_hpa = 15.0;
    double wind_knee_kt = 95.0;
    double wind_scale_kt = 20.0;

    // No nuisance and no noise: features are an exact linear map of (P, V).
    bool exact = false;
};

nlohmann::json to_json(const ToyParams& p);

/// Encoder of the toy on the state (P - 1000, V); its saturation compresses the
/// intense range of both coordinates when p.saturation is set.
EncoderSpec toy_encoder(const ToyParams& p);

struct ToyOutput {
    std::vector<Trajectory> storms;
    FeatureStore store;  // rows ordered by (storm, time)
};

ToyOutput cyclone_toy(const ToyParams& p, std::size_t n_storms, std::uint64_t seed);

}  // namespace sprobe::synth
