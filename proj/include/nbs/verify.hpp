#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbs/amplifier.hpp"
#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/states.hpp"
#include "nbs/stats.hpp"
#include "nbs/su11.hpp"

// Cross-module identity checks run by `nbs_lab verify`.
namespace nbs::cli {

struct CheckResult {
    std::string suite;
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

struct VerifyOptions {
    TruncationPolicy policy{};
    std::optional<double> tolerance;  // replaces every check's threshold when set
    std::uint64_t seed = 20261016;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"algebra", "statistics", "amplifier", "limits", "all"};
    return names;
}

namespace detail {

class CheckRunner {
public:
    CheckRunner(std::string suite, const VerifyOptions& opt, std::vector<CheckResult>& out)
        : suite_(std::move(suite)), opt_(opt), out_(out) {}

    // residual must be <= threshold (or the override) to pass.
    void check(const std::string& name, double threshold, const std::function<double()>& residual,
               std::string detail = {}) {
        CheckResult r{suite_, name, 0.0, opt_.tolerance.value_or(threshold), false, std::move(detail)};
        try {
            r.residual = residual();
            r.pass = std::isfinite(r.residual) && r.residual <= r.threshold;
        } catch (const Error& e) {
            r.residual = std::numeric_limits<double>::quiet_NaN();
            r.detail = std::string("error: ") + e.what();
        }
        out_.push_back(std::move(r));
    }

    [[nodiscard]] const TruncationPolicy& policy() const { return opt_.policy; }

private:
    std::string suite_;
    const VerifyOptions& opt_;
    std::vector<CheckResult>& out_;
};

struct GridPoint {
    double eta2;
    int m;
};

inline const std::vector<GridPoint>& algebra_sample() {
    static const std::vector<GridPoint> pts = {{0.3, 1}, {0.3, 4}, {0.7, 1}, {0.7, 4}};
    return pts;
}

inline void run_algebra(CheckRunner& run) {
    const TruncationPolicy policy = run.policy();
    const TruncationPolicy tight = tightened(policy);

    run.check("exponential_identity", 1e-12, [] {
        double worst = 0.0;
        for (int m : {1, 2, 3, 7})
            for (std::size_t n = 1; n <= 20; ++n) worst = std::max(worst, su11::exponential_identity_check(m, n));
        return worst;
    }, "(b^dag g(N))^n|0> vs (b^dag)^n g(0)...g(n-1)|0>, M in {1,2,3,7}, n <= 20");

    run.check("three_form_equality", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& g : algebra_sample()) {
            const auto p = NbsParams::from_eta2(g.eta2, 0.4, g.m);
            const auto direct = nbs_state(p, policy);
            const auto expo = su11::nbs_exponential_form(p, policy);
            const auto disp = su11::nbs_displacement_form(su11::Su11Params::from_nbs(p), policy);
            worst = std::max({worst, 1.0 - fidelity(direct, expo), 1.0 - fidelity(direct, disp),
                              1.0 - fidelity(expo, disp)});
        }
        return worst;
    }, "max pairwise fidelity defect, (eta2, M) in {0.3, 0.7} x {1, 4}");

    run.check("ladder_residual", 1e-8, [&] {
        double worst = 0.0;
        for (const auto& g : algebra_sample()) {
            worst = std::max(worst, su11::ladder_residual(NbsParams::from_eta2(g.eta2, 1.1, g.m), tight).residual);
        }
        return worst;
    }, "||(e^{-i theta} K- - eta^2 e^{i theta} K+ - M eta) psi||");

    run.check("em_eigenvalue", 1e-10, [&] {
        double worst = 0.0;
        for (const auto& g : algebra_sample()) {
            const int m = std::max(g.m, 2);
            worst = std::max(worst, su11::em_residual(NbsParams::from_eta2(g.eta2, 1.1, m), tight));
        }
        return worst;
    }, "||E-_M psi - eta e^{i theta} psi||, M >= 2");

    run.check("geometric_sg_eigenstate", 1e-10, [&] {
        double worst = 0.0;
        for (double e2 : {0.1, 0.5, 0.9}) {
            const double eta = std::sqrt(e2);
            const auto g = geometric_state(eta, 0.9, tight);
            worst = std::max(worst, axpy(-std::polar(eta, 0.9), g, su11::em_apply(g, 1)).norm());
        }
        return worst;
    }, "||E- g - eta e^{i theta} g|| for geometric states");

    run.check("su11_commutators", 1e-11, [] {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> gauss;
        double worst = 0.0;
        for (int m : {1, 3}) {
            std::vector<complex> a(40, complex{0.0, 0.0});
            for (std::size_t n = 0; n < 30; ++n) a[n] = {gauss(rng), gauss(rng)};
            const FockVector v(a);
            const auto kp = [m](const FockVector& x) { return su11::k_plus_apply(x, m); };
            const auto km = [m](const FockVector& x) { return su11::k_minus_apply(x, m); };
            const auto k0 = [m](const FockVector& x) { return su11::k_zero_apply(x, m); };
            worst = std::max(worst, distance(k0(kp(v)) - kp(k0(v)), kp(v)) / kp(v).norm());
            worst = std::max(worst, distance(k0(km(v)) - km(k0(v)), -1.0 * km(v)) / km(v).norm());
            worst = std::max(worst, distance(kp(km(v)) - km(kp(v)), -2.0 * k0(v)) / k0(v).norm());
        }
        return worst;
    }, "[K0,K+]=K+, [K0,K-]=-K-, [K+,K-]=-2K0 on random vectors (relative)");

    run.check("bk_shift", 1e-10, [] {
        double worst = 0.0;
        worst = std::max(worst, bk_shift_check(NbsParams::from_eta2(0.5, 0.0, 1), 1));
        worst = std::max(worst, bk_shift_check(NbsParams::from_eta2(0.3, 0.7, 3), 2));
        worst = std::max(worst, bk_shift_check(NbsParams::from_eta2(0.6, 2.0, 2), 4));
        return worst;
    }, "b^k NBS(M) vs scaled NBS(M+k)");
}

inline void run_statistics(CheckRunner& run, std::uint64_t seed) {
    const TruncationPolicy policy = run.policy();
    // Moment comparisons: the discarded tail weighted by n^2 is ~tail_tol * n_max^2,
    // which at the default tolerance is already 1e-9 relative.
    const TruncationPolicy tight = tightened(policy);
    run.check("normalization", 1e-11, [&] {
        double worst = 0.0;
        for (int i = 1; i <= 9; ++i)
            for (int m : {1, 2, 5, 50})
                worst = std::max(worst, std::abs(nbs_state(NbsParams::from_eta2(0.1 * i, 0.0, m), policy).norm_squared() - 1.0));
        return worst;
    }, "|norm^2 - 1| on eta2 in {0.1..0.9} x M in {1,2,5,50}");

    run.check("mandel_q_closed_vs_direct", 1e-9, [&] {
        double worst = 0.0;
        for (int i = 1; i <= 9; ++i)
            for (int m : {1, 2, 5, 50}) {
                const auto p = NbsParams::from_eta2(0.1 * i, 0.0, m);
                const double qc = photon_stats_closed(p).mandel_q;
                const double qd = photon_stats_direct(nbs_state(p, tight)).mandel_q;
                worst = std::max(worst, std::abs(qd - qc) / qc);
            }
        return worst;
    }, "relative difference of Q");

    run.check("g2_closed_vs_direct", 1e-9, [&] {
        double worst = 0.0;
        for (int i = 1; i <= 9; ++i)
            for (int m : {1, 2, 5, 50}) {
                const auto p = NbsParams::from_eta2(0.1 * i, 0.0, m);
                const double gd = photon_stats_direct(nbs_state(p, tight)).g2;
                worst = std::max(worst, std::abs(gd - (1.0 + 1.0 / m)) / (1.0 + 1.0 / m));
            }
        return worst;
    }, "relative difference of g2 from 1 + 1/M");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u_e2(0.01, 0.99), u_th(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> u_m(1, 50);
    std::vector<NbsParams> sample;
    for (int i = 0; i < 50; ++i) {
        const double e2 = u_e2(rng);
        const double th = u_th(rng);
        sample.push_back(NbsParams::from_eta2(e2, th, u_m(rng)));
    }

    run.check("resummation_identity", 1e-10, [&] {
        double worst = 0.0;
        for (const auto& p : sample) worst = std::max(worst, var_p_series_detailed(p).identity_rel_error);
        return worst;
    }, "eta^2 sum B_n (M+n) vs M eta^2/(1-eta^2), relative, 50 random points");

    run.check("var_series_vs_direct", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& p : sample) {
            const auto q = quadrature_direct(nbs_state(p, tight));
            worst = std::max({worst, std::abs(var_p_series(p, tight.tail_tol) - q.var_p),
                              std::abs(var_x_series(p, tight.tail_tol) - q.var_x)});
        }
        return worst;
    }, "max |series - direct| for var_p and var_x, 50 random points");
}

inline void run_amplifier(CheckRunner& run) {
    const TruncationPolicy policy = run.policy();
    std::vector<amplifier::AmplifierConfig> cfgs;
    for (double x : {0.2, 0.5, 1.0})
        for (int m : {1, 3}) cfgs.push_back({1.0, 0.7, 1.3, m, x});

    run.check("oracle_fidelity", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& c : cfgs) {
            const auto ev = amplifier::evolve(c, policy);
            const auto an = amplifier::analytic_evolved_state(c, policy);
            worst = std::max(worst, 1.0 - fidelity(ev.to_fock(), an.to_fock()));
        }
        return worst;
    }, "1 - |<evolved|analytic>|, chi t in {0.2,0.5,1.0}, M in {1,3}");

    run.check("matches_nbs", 1e-9, [&] {
        double worst = 0.0;
        for (const auto& c : cfgs) {
            const auto ev = amplifier::evolve(c, policy);
            const auto target = nbs_state({c.eta(), c.theta(), c.m}, policy);
            worst = std::max(worst, 1.0 - fidelity(ev.to_fock(), target));
        }
        return worst;
    }, "1 - |<evolved|NBS(tanh chi t, 2 omega t, M)>|");

    run.check("unitarity", 1e-10, [&] {
        double worst = 0.0;
        for (const auto& c : cfgs) worst = std::max(worst, std::abs(amplifier::evolve(c, policy).to_fock().norm() - 1.0));
        return worst;
    }, "| ||U(t)|0,M-1>|| - 1 |");

    run.check("semigroup", 1e-9, [&] {
        double worst = 0.0;
        for (int m : {1, 3}) {
            const std::size_t dim = amplifier::working_dim(1.0, m, policy);
            const auto whole = amplifier::squeeze(amplifier::pair_vacuum(m), 1.0, dim).state;
            const auto first = amplifier::squeeze(amplifier::pair_vacuum(m), 0.35, dim).state;
            const auto split = amplifier::squeeze(first, 0.65, dim).state;
            worst = std::max(worst, 1.0 - fidelity(whole.to_fock(), split.to_fock()));
        }
        return worst;
    }, "S(0.35 + 0.65) vs S(0.65) S(0.35) in the rotating frame");
}

inline void run_limits(CheckRunner& run) {
    const TruncationPolicy policy = run.policy();
    auto coherent_fid = [&](int m) {
        const auto coh = coherent_state({1.0, 0.0}, policy);
        const auto nb = nbs_state({1.0 / std::sqrt(static_cast<double>(m)), 0.0, m}, policy);
        return fidelity(coh, nb);
    };

    run.check("coherent_limit_monotone", 0.0, [&] {
        const double f25 = coherent_fid(25), f100 = coherent_fid(100), f400 = coherent_fid(400);
        return std::max(0.0, std::max(f25 - f100, f100 - f400));
    }, "fidelity decrease along M = 25, 100, 400 at alpha = 1 (0 when increasing)");

    run.check("coherent_limit_M400", 1e-3, [&] { return 1.0 - coherent_fid(400); },
              "1 - |<coherent(1)|NBS(1/sqrt(400), 400)>|");

    run.check("vacuum_limit", 0.0, [&] {
        return distance(nbs_state({0.0, 0.3, 5}, policy), FockVector::number_state(0));
    }, "NBS at eta = 0 is exactly |0>");

    run.check("phase_state_amplitudes", 1e-2, [] {
        const auto amps = scaled_phase_amplitudes(0.999, 0.0, 6);
        double worst = 0.0;
        for (const auto& a : amps) worst = std::max(worst, std::abs(a - 1.0 / std::sqrt(2.0 * std::numbers::pi)));
        return worst;
    }, "scaled geometric amplitudes at eta = 0.999 vs 1/sqrt(2 pi), n <= 5");

    run.check("phase_identity_resolution", 1e-12, [] { return phase_identity_check(10, 256); },
              "max |int |theta><theta| - 1|, n_max = 10, 256 nodes");
}

}  // namespace detail

inline std::vector<CheckResult> run_verify(const std::string& suite, const VerifyOptions& opt = {}) {
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
        throw DomainError("unknown suite '" + suite + "' (expected algebra, statistics, amplifier, limits or all)");
    }
    opt.policy.validate();
    std::vector<CheckResult> out;
    const bool all = suite == "all";
    if (all || suite == "algebra") {
        detail::CheckRunner r("algebra", opt, out);
        detail::run_algebra(r);
    }
    if (all || suite == "statistics") {
        detail::CheckRunner r("statistics", opt, out);
        detail::run_statistics(r, opt.seed);
    }
    if (all || suite == "amplifier") {
        detail::CheckRunner r("amplifier", opt, out);
        detail::run_amplifier(r);
    }
    if (all || suite == "limits") {
        detail::CheckRunner r("limits", opt, out);
        detail::run_limits(r);
    }
    return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

inline nlohmann::ordered_json to_json(const std::string& suite, const std::vector<CheckResult>& checks) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        arr.push_back({{"suite", c.suite},
                       {"name", c.name},
                       {"residual", std::isfinite(c.residual) ? nlohmann::ordered_json(c.residual) : nlohmann::ordered_json(nullptr)},
                       {"threshold", c.threshold},
                       {"pass", c.pass},
                       {"detail", c.detail}});
    }
    return {{"suite", suite}, {"pass", all_passed(checks)}, {"checks", arr}};
}

}  // namespace nbs::cli
