#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "sprobe/error.hpp"
#include "sprobe/synth.hpp"

namespace sprobe::synth {

bool SyntheticSystem::in_box(const VectorXd& y) const {
    return y.size() == box_lo.size() && (y.array() >= box_lo.array()).all() && (y.array() <= box_hi.array()).all();
}

namespace {

VectorXd uniform_in_box(Rng& rng, const SyntheticSystem& s) {
    VectorXd y(static_cast<Eigen::Index>(s.m));
    for (Eigen::Index j = 0; j < y.size(); ++j) y(j) = rng.uniform(s.box_lo(j), s.box_hi(j));
    return y;
}

// Largest singular value of a tall, thin matrix through its m x m Gram matrix.
double spectral_norm(const MatrixXd& J) {
    if (J.size() == 0) return 0.0;
    const MatrixXd G = J.transpose() * J;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

void check_shape(const SyntheticSystem& s) {
    if (s.m == 0) throw ValidationError("synthetic system: state dimension must be positive");
    if (s.regimes.empty()) throw ValidationError("synthetic system: no regimes");
    if (!s.vector_field) throw ValidationError("synthetic system: missing vector field");
    if (static_cast<std::size_t>(s.box_lo.size()) != s.m || static_cast<std::size_t>(s.box_hi.size()) != s.m)
        throw ValidationError("synthetic system: state box has the wrong dimension");
    if (!(s.box_lo.array() < s.box_hi.array()).all()) throw ValidationError("synthetic system: empty state box");
    if (!(s.K >= 0.0)) throw ValidationError("synthetic system: K must be non-negative");
}

VectorXd rk4(const SyntheticSystem& s, const VectorXd& mu, const VectorXd& y, double h) {
    const VectorXd k1 = s.vector_field(mu, y);
    const VectorXd k2 = s.vector_field(mu, y + 0.5 * h * k1);
    const VectorXd k3 = s.vector_field(mu, y + 0.5 * h * k2);
    const VectorXd k4 = s.vector_field(mu, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Sink>
void integrate(const SyntheticSystem& s, std::size_t regime, const VectorXd& y0, std::size_t n_steps,
               double dt_hours, std::size_t substeps, Sink&& sink) {
    check_shape(s);
    if (regime >= s.regimes.size()) throw ValidationError("simulate: regime index out of range");
    if (substeps < 8) throw ValidationError("simulate: at least 8 substeps per step are required");
    if (!(dt_hours > 0.0) || !std::isfinite(dt_hours)) throw ValidationError("simulate: dt must be positive");
    if (static_cast<std::size_t>(y0.size()) != s.m) throw ValidationError("simulate: initial state has wrong size");
    if (!y0.allFinite() || !s.in_box(y0)) throw ValidationError("simulate: initial state outside the state box");
    const VectorXd& mu = s.regimes[regime];
    const double h = dt_hours / static_cast<double>(substeps);
    VectorXd y = y0;
    sink(std::size_t{0}, std::size_t{0}, y);
    for (std::size_t n = 1; n <= n_steps; ++n) {
        for (std::size_t k = 1; k <= substeps; ++k) {
            y = rk4(s, mu, y, h);
            if (!y.allFinite())
                throw ValidationError("simulate: non-finite state at step " + std::to_string(n));
            if (!s.in_box(y)) throw ValidationError("simulate: trajectory left the state box at step " + std::to_string(n));
            sink(n, k, y);
        }
    }
}

}  // namespace

void validate(const SyntheticSystem& s, std::uint64_t seed, std::size_t samples) {
    check_shape(s);
    Rng rng(seed);
    for (const auto& mu : s.regimes) {
        for (std::size_t i = 0; i < samples; ++i) {
            const VectorXd y = uniform_in_box(rng, s);
            const double norm = s.vector_field(mu, y).norm();
            if (!(norm <= s.K * (1.0 + 1e-12) + 1e-12))
                throw ValidationError("synthetic system: ||f|| = " + std::to_string(norm) + " exceeds K = " +
                                      std::to_string(s.K));
        }
    }
    if (s.constraints.empty()) return;
    if (!s.sample_initial) throw ValidationError("synthetic system: constraints need sample_initial");
    for (std::size_t r = 0; r < s.regimes.size(); ++r) {
        for (int t = 0; t < 4; ++t) {
            const VectorXd y0 = s.sample_initial(rng, s.regimes[r]);
            integrate(s, r, y0, 5, 0.1, 8, [&](std::size_t, std::size_t, const VectorXd& y) {
                for (const auto& c : s.constraints)
                    if (std::abs(c.fn(y)) > 1e-8)
                        throw ValidationError("synthetic system: constraint '" + c.name +
                                              "' does not vanish on a generated trajectory");
            });
        }
    }
}

std::vector<VectorXd> simulate_trajectory(const SyntheticSystem& s, std::size_t regime, const VectorXd& y0,
                                          std::size_t n_steps, double dt_hours, std::size_t substeps) {
    std::vector<VectorXd> out;
    out.reserve(n_steps + 1);
    integrate(s, regime, y0, n_steps, dt_hours, substeps, [&](std::size_t, std::size_t k, const VectorXd& y) {
        if (k == 0 || k == substeps) out.push_back(y);
    });
    return out;
}

std::vector<VectorXd> simulate_dense(const SyntheticSystem& s, std::size_t regime, const VectorXd& y0,
                                     std::size_t n_steps, double dt_hours, std::size_t substeps) {
    std::vector<VectorXd> out;
    out.reserve(n_steps * substeps + 1);
    integrate(s, regime, y0, n_steps, dt_hours, substeps,
              [&](std::size_t, std::size_t, const VectorXd& y) { out.push_back(y); });
    return out;
}

VectorXd saturate(const std::vector<Saturation>& sat, const VectorXd& y) {
    VectorXd out = y;
    for (const auto& s : sat) {
        if (s.coordinate >= static_cast<std::size_t>(y.size()))
            throw ValidationError("saturation coordinate out of range");
        const auto j = static_cast<Eigen::Index>(s.coordinate);
        if (s.below && y(j) < s.knee)
            out(j) = s.knee - s.scale * std::tanh((s.knee - y(j)) / s.scale);
        else if (!s.below && y(j) > s.knee)
            out(j) = s.knee + s.scale * std::tanh((y(j) - s.knee) / s.scale);
    }
    return out;
}

VectorXd saturation_slope(const std::vector<Saturation>& sat, const VectorXd& y) {
    VectorXd out = VectorXd::Ones(y.size());
    for (const auto& s : sat) {
        const auto j = static_cast<Eigen::Index>(s.coordinate);
        if ((s.below && y(j) < s.knee) || (!s.below && y(j) > s.knee)) {
            const double t = std::tanh(std::abs(y(j) - s.knee) / s.scale);
            out(j) = 1.0 - t * t;
        }
    }
    return out;
}

VectorXd encode(const EncoderSpec& spec, const VectorXd& mu, const VectorXd& y) {
    VectorXd z = spec.saturation.empty() ? VectorXd(spec.A * y) : VectorXd(spec.A * saturate(spec.saturation, y));
    if (spec.residual.value) z += spec.residual.value(mu, y);
    return z;
}

MatrixXd residual_jacobian(const Residual& r, const VectorXd& mu, const VectorXd& y) {
    if (r.jacobian) return r.jacobian(mu, y);
    if (!r.value) return MatrixXd();
    const VectorXd f0 = r.value(mu, y);
    MatrixXd J(f0.size(), y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(y(j)));
        VectorXd yp = y, ym = y;
        yp(j) += h;
        ym(j) -= h;
        J.col(j) = (r.value(mu, yp) - r.value(mu, ym)) / (2.0 * h);
    }
    return J;
}

namespace {

MatrixXd fd_jacobian(const Residual& r, const VectorXd& mu, const VectorXd& y) {
    Residual plain;
    plain.value = r.value;
    return residual_jacobian(plain, mu, y);
}

}  // namespace

std::pair<double, double> certify(const Residual& r, const SyntheticSystem& s, std::size_t samples,
                                  std::uint64_t seed, double inflation) {
    check_shape(s);
    if (!r.value) return {0.0, 0.0};
    Rng rng(seed);
    double eps = 0.0, delta = 0.0;
    const std::size_t per_regime = std::max<std::size_t>(1, samples / s.regimes.size());
    for (const auto& mu : s.regimes) {
        for (std::size_t i = 0; i < per_regime; ++i) {
            const VectorXd y = uniform_in_box(rng, s);
            eps = std::max(eps, r.value(mu, y).norm());
            delta = std::max(delta, spectral_norm(residual_jacobian(r, mu, y)));
        }
    }
    return {eps * inflation, delta * inflation};
}

LeftInverse left_inverse(const MatrixXd& A) {
    if (A.size() == 0 || A.rows() < A.cols())
        throw RankDeficientError("left_inverse: A must be tall with at least one column");
    Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 1e-12 * std::max(1.0, smax)))
        throw RankDeficientError("left_inverse: A is not injective (sigma_min = " + std::to_string(smin) + ")");
    LeftInverse out;
    out.L = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
    out.norm = 1.0 / smin;
    return out;
}

void validate(const EncoderSpec& spec, const SyntheticSystem& s, std::uint64_t seed, std::size_t samples) {
    if (spec.m() != s.m) throw ValidationError("encoder: A has " + std::to_string(spec.m()) + " columns, system has m = " +
                                               std::to_string(s.m));
    left_inverse(spec.A);
    if (!spec.residual.value) return;
    Rng rng(seed);
    for (const auto& mu : s.regimes) {
        for (std::size_t i = 0; i < samples; ++i) {
            const VectorXd y = uniform_in_box(rng, s);
            const double e = spec.residual.value(mu, y).norm();
            if (e > spec.residual.eps_bar + 1e-6)
                throw ValidationError("encoder: residual norm " + std::to_string(e) + " exceeds eps_bar " +
                                      std::to_string(spec.residual.eps_bar));
            const double j = spectral_norm(fd_jacobian(spec.residual, mu, y));
            if (j > spec.residual.delta_bar + 1e-6)
                throw ValidationError("encoder: residual Jacobian norm " + std::to_string(j) + " exceeds delta_bar " +
                                      std::to_string(spec.residual.delta_bar));
        }
    }
}

BoundReport evaluate_bounds(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                            const BoundOptions& opt, std::uint64_t seed) {
    check_shape(s);
    if (!spec.saturation.empty())
        throw ValidationError("verify_bounds: the bounds hold for unsaturated encoders only");
    if (spec.m() != s.m) throw ValidationError("verify_bounds: encoder and system dimensions differ");
    if (!s.sample_initial) throw ValidationError("verify_bounds: system has no sample_initial");
    if (opt.samples == 0 || opt.n_steps == 0) throw ValidationError("verify_bounds: need samples and steps");

    BoundReport rep;
    rep.l_norm = L.norm;
    rep.eps_bar = spec.residual.eps_bar;
    rep.delta_bar = spec.residual.delta_bar;
    rep.K = s.K;
    for (const auto& c : s.constraints) rep.lambda = std::max(rep.lambda, c.lipschitz);
    rep.stat.theoretical = L.norm * rep.eps_bar;
    rep.dyn.theoretical = L.norm * rep.delta_bar * s.K;
    rep.con.theoretical = rep.lambda * L.norm * rep.eps_bar;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    auto consider = [&](const char* what, double value, double bound, std::size_t r, std::size_t smp,
                        std::size_t idx) {
        if (bound - value < rep.worst_margin) {
            rep.worst_margin = bound - value;
            rep.worst = Witness{what, r, smp, idx, value, bound};
        }
    };

    const double h = opt.dt_hours / static_cast<double>(opt.substeps);
    Rng rng(seed);
    for (std::size_t r = 0; r < s.regimes.size(); ++r) {
        const VectorXd& mu = s.regimes[r];
        double stat_sum = 0.0, dyn_sum = 0.0, con_sum = 0.0;
        std::size_t n_states = 0, n_diffs = 0;
        for (std::size_t smp = 0; smp < opt.samples; ++smp) {
            const VectorXd y0 = s.sample_initial(rng, mu);
            const auto ys = simulate_dense(s, r, y0, opt.n_steps, opt.dt_hours, opt.substeps);
            VectorXd prev_y, prev_z;
            for (std::size_t i = 0; i < ys.size(); ++i) {
                const VectorXd& y = ys[i];
                const VectorXd z = encode(spec, mu, y);
                const VectorXd yhat = L.L * z;
                const double stat = (y - yhat).norm();
                stat_sum += stat;
                rep.stat.empirical_max = std::max(rep.stat.empirical_max, stat);
                consider("stat", stat, rep.stat.theoretical, r, smp, i);
                double con = 0.0;
                for (const auto& c : s.constraints) {
                    const double v = std::abs(c.fn(yhat));
                    con = std::max(con, v);
                    consider("con", v, c.lipschitz * L.norm * rep.eps_bar, r, smp, i);
                }
                con_sum += con;
                rep.con.empirical_max = std::max(rep.con.empirical_max, con);
                ++n_states;
                if (i > 0) {
                    const double dyn = ((L.L * (z - prev_z)) - (y - prev_y)).norm() / h;
                    dyn_sum += dyn;
                    rep.dyn.empirical_max = std::max(rep.dyn.empirical_max, dyn);
                    consider("dyn", dyn, rep.dyn.theoretical, r, smp, i);
                    ++n_diffs;
                }
                prev_y = y;
                prev_z = z;
            }
        }
        rep.states += n_states;
        rep.stat.empirical = std::max(rep.stat.empirical, stat_sum / static_cast<double>(n_states));
        rep.con.empirical = std::max(rep.con.empirical, con_sum / static_cast<double>(n_states));
        rep.dyn.empirical = std::max(rep.dyn.empirical, dyn_sum / static_cast<double>(n_diffs));
    }
    return rep;
}

BoundReport verify_bounds(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                          const BoundOptions& opt, std::uint64_t seed) {
    BoundReport rep = evaluate_bounds(s, spec, L, opt, seed);
    if (rep.worst_margin < -opt.tolerance) {
        const auto& w = rep.worst;
        throw BoundViolation("bound violation: " + w.quantity + " residual " + std::to_string(w.value) +
                             " exceeds bound " + std::to_string(w.bound) + " (regime " + std::to_string(w.regime) +
                             ", sample " + std::to_string(w.sample) + ", state " + std::to_string(w.state) + ")");
    }
    return rep;
}

RolloutReport rollout_report(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                             std::size_t regime, const VectorXd& y_star, std::size_t n_steps, double dt_hours,
                             std::size_t substeps) {
    if (!spec.saturation.empty())
        throw ValidationError("interventional_rollout: the bound holds for unsaturated encoders only");
    if (spec.m() != s.m) throw ValidationError("interventional_rollout: encoder and system dimensions differ");
    const auto ys = simulate_trajectory(s, regime, y_star, n_steps, dt_hours, substeps);
    const VectorXd& mu = s.regimes[regime];
    RolloutReport out;
    out.eps_stat = L.norm * spec.residual.eps_bar;
    out.eps_dyn = L.norm * spec.residual.delta_bar * s.K;
    out.min_margin = std::numeric_limits<double>::infinity();
    const VectorXd z0 = encode(spec, mu, ys[0]);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 1; n < ys.size(); ++n) {
        const double t = static_cast<double>(n) * dt_hours;
        const double e = (L.L * (encode(spec, mu, ys[n]) - z0) - (ys[n] - ys[0])).norm();
        const double b = out.eps_stat + out.eps_dyn * t;
        out.times.push_back(t);
        out.errors.push_back(e);
        out.bounds.push_back(b);
        num += e * t;
        den += t * t;
        if (b - e < out.min_margin) {
            out.min_margin = b - e;
            out.worst_step = n;
        }
    }
    out.slope = den > 0.0 ? num / den : 0.0;
    return out;
}

RolloutReport interventional_rollout(const SyntheticSystem& s, const EncoderSpec& spec, const LeftInverse& L,
                                     std::size_t regime, const VectorXd& y_star, std::size_t n_steps,
                                     double dt_hours, double tolerance) {
    RolloutReport rep = rollout_report(s, spec, L, regime, y_star, n_steps, dt_hours);
    if (rep.min_margin < -tolerance) {
        const std::size_t n = rep.worst_step;
        throw BoundViolation("rollout bound violated at step " + std::to_string(n) + ": error " +
                             std::to_string(rep.errors[n - 1]) + " > bound " + std::to_string(rep.bounds[n - 1]));
    }
    return rep;
}

SyntheticSystem random_system(std::uint64_t seed, double horizon_hours) {
    if (!(horizon_hours > 0.0)) throw ValidationError("random_system: horizon must be positive");
    Rng rng(seed);
    const auto m = static_cast<Eigen::Index>(2 + rng.index(2));
    const double speed = rng.uniform(0.2, 1.0);
    MatrixXd W(m, m);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = rng.normal();
    VectorXd c(m);
    for (Eigen::Index i = 0; i < m; ++i) c(i) = rng.normal();
    c.normalize();
    const MatrixXd Pi = MatrixXd::Identity(m, m) - c * c.transpose();
    const double lambda = rng.uniform(0.5, 2.0);

    SyntheticSystem s;
    s.m = static_cast<std::size_t>(m);
    for (int r = 0; r < 3; ++r) {
        VectorXd b(m);
        for (Eigen::Index i = 0; i < m; ++i) b(i) = 0.5 * rng.normal();
        s.regimes.push_back(b);
    }
    s.vector_field = [speed, W, Pi](const VectorXd& mu, const VectorXd& y) -> VectorXd {
        return speed * (Pi * (W * y + mu).array().tanh().matrix());
    };
    // ||Pi tanh(.)|| <= ||tanh(.)|| <= sqrt(m)
    s.K = speed * std::sqrt(static_cast<double>(m));
    s.constraints.push_back({"invariant", [lambda, c](const VectorXd& y) { return lambda * c.dot(y); }, lambda});
    const double radius = 1.0;
    const double half = std::sqrt(static_cast<double>(m)) * radius + s.K * horizon_hours + 1.0;
    s.box_lo = VectorXd::Constant(m, -half);
    s.box_hi = VectorXd::Constant(m, half);
    s.sample_initial = [Pi, radius, m](Rng& g, const VectorXd&) -> VectorXd {
        VectorXd u(m);
        for (Eigen::Index i = 0; i < m; ++i) u(i) = g.uniform(-radius, radius);
        return Pi * u;
    };
    return s;
}

EncoderSpec random_encoder(const SyntheticSystem& s, std::uint64_t seed, std::size_t certify_samples) {
    Rng rng(seed);
    const auto m = static_cast<Eigen::Index>(s.m);
    const auto d = static_cast<Eigen::Index>(s.m + 1 + rng.index(5));
    EncoderSpec spec;
    spec.A.resize(d, m);
    for (Eigen::Index i = 0; i < spec.A.size(); ++i) spec.A.data()[i] = rng.normal();
    const double amp = rng.uniform(0.005, 0.1);
    const double freq = rng.uniform(0.5, 2.0);
    VectorXd u(d);
    for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.uniform(-1.0, 1.0);
    MatrixXd Omega(d, m), Phi(d, m);
    for (Eigen::Index i = 0; i < Omega.size(); ++i) Omega.data()[i] = freq * rng.normal();
    for (Eigen::Index i = 0; i < Phi.size(); ++i) Phi.data()[i] = rng.normal();
    spec.residual.value = [amp, u, Omega, Phi](const VectorXd& mu, const VectorXd& y) -> VectorXd {
        return amp * (u.array() * (Omega * y + Phi * mu).array().sin()).matrix();
    };
    spec.residual.jacobian = [amp, u, Omega, Phi](const VectorXd& mu, const VectorXd& y) -> MatrixXd {
        const VectorXd w = amp * (u.array() * (Omega * y + Phi * mu).array().cos()).matrix();
        return w.asDiagonal() * Omega;
    };
    const auto [eps, delta] = certify(spec.residual, s, certify_samples, derive_seed(seed, 1));
    spec.residual.eps_bar = eps;
    spec.residual.delta_bar = delta;
    left_inverse(spec.A);
    return spec;
}

}  // namespace sprobe::synth
