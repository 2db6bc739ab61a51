#include "sprobe/synth.hpp"

namespace sprobe::synth {

namespace {

constexpr std::uint64_t kSystemStream = 0;
constexpr std::uint64_t kEncoderStream = 1;
constexpr std::uint64_t kEvalStream = 2;

}  // namespace

std::vector<SuiteEntry> bound_suite(std::uint64_t seed, std::size_t systems, const BoundOptions& opt,
                                    std::size_t certify_samples) {
    const double horizon = static_cast<double>(opt.n_steps) * opt.dt_hours;
    std::vector<SuiteEntry> out;
    for (std::size_t i = 0; i < systems; ++i) {
        const std::uint64_t base = derive_seed(seed, i);
        SuiteEntry e;
        e.system_seed = derive_seed(base, kSystemStream);
        e.encoder_seed = derive_seed(base, kEncoderStream);
        const auto sys = random_system(e.system_seed, horizon);
        const auto enc = random_encoder(sys, e.encoder_seed, certify_samples);
        e.m = sys.m;
        e.d = enc.d();
        e.bounds = evaluate_bounds(sys, enc, left_inverse(enc.A), opt, derive_seed(base, kEvalStream));
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<RolloutEntry> rollout_suite(std::uint64_t seed, std::size_t systems, std::size_t n_steps,
                                        double dt_hours, std::size_t certify_samples) {
    const double horizon = static_cast<double>(n_steps) * dt_hours;
    std::vector<RolloutEntry> out;
    for (std::size_t i = 0; i < systems; ++i) {
        const std::uint64_t base = derive_seed(seed, i);
        const std::uint64_t sys_seed = derive_seed(base, kSystemStream);
        const std::uint64_t enc_seed = derive_seed(base, kEncoderStream);
        const auto sys = random_system(sys_seed, horizon);
        const auto enc = random_encoder(sys, enc_seed, certify_samples);
        const auto L = left_inverse(enc.A);
        Rng rng(derive_seed(base, kEvalStream));
        for (std::size_t r = 0; r < sys.regimes.size(); ++r) {
            const VectorXd y_star = sys.sample_initial(rng, sys.regimes[r]);
            out.push_back({sys_seed, enc_seed, r, rollout_report(sys, enc, L, r, y_star, n_steps, dt_hours)});
        }
    }
    return out;
}

}  // namespace sprobe::synth
