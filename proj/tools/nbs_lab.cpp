// nbs_lab: command-line front end for the negative binomial state toolkit.
//
//   nbs_lab pmf --eta2 0.5 --m 1
//   nbs_lab stats --eta2 0.5 --theta-pi 0.25 --m 5
//   nbs_lab sweep --preset fig1 --format csv --out fig1.csv
//   nbs_lab amplifier --chi 1 --omega1 0.7 --omega2 1.3 --m 3 --t 0.5
//   nbs_lab verify --suite all
//
// Exit status: 0 on success, 1 when a grid point or verification check failed,
// 2 on invalid input.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbs/amplifier.hpp"
#include "nbs/config.hpp"
#include "nbs/nbs.hpp"
#include "nbs/sweep.hpp"
#include "nbs/verify.hpp"

namespace {

using nbs::cli::format_double;
using json = nlohmann::ordered_json;

constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::optional<double> tail_tol;
    std::optional<std::size_t> hard_cap;
    std::string config_path;
    std::string format = "csv";
    std::string out_path;
    std::string preset;

    [[nodiscard]] nbs::TruncationPolicy policy() const {
        nbs::TruncationPolicy p;
        if (!config_path.empty()) nbs::cli::load_config(config_path).apply_to(p);
        if (tail_tol) p.tail_tol = *tail_tol;
        if (hard_cap) p.hard_cap = *hard_cap;
        p.validate();
        return p;
    }
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw nbs::DomainError("cannot open output file " + path);
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

double resolve_angle(const std::optional<double>& radians, const std::optional<double>& pi_multiple) {
    if (radians && pi_multiple) throw nbs::DomainError("give only one of --theta and --theta-pi");
    if (pi_multiple) return *pi_multiple * std::numbers::pi;
    return radians.value_or(0.0);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_pmf(const GlobalOptions& g, double eta2, int m, std::optional<std::size_t> n_upto) {
    const auto policy = g.policy();
    const auto p = nbs::NbsParams::from_eta2(eta2, 0.0, m);
    p.validate();
    const std::size_t last = n_upto ? *n_upto : nbs::nbd_truncated(p.eta, m, policy).probs.size() - 1;

    nbs::CompensatedSum<double> cumulative;
    Output out(g.out_path);
    auto& os = out.stream();
    if (g.format == "json") {
        json rows = json::array();
        for (std::size_t n = 0; n <= last; ++n) {
            const double v = nbs::nbd_pmf(n, p.eta, m);
            cumulative += v;
            rows.push_back({{"n", n}, {"pmf", v}, {"cumulative", cumulative.value()}});
        }
        json doc{{"metadata",
                  {{"tool", nbs::cli::kToolName},
                   {"version", nbs::cli::kToolVersion},
                   {"eta2", eta2},
                   {"m", m},
                   {"tail_tol", policy.tail_tol},
                   {"hard_cap", policy.hard_cap}}},
                 {"rows", rows}};
        os << doc.dump(2) << '\n';
    } else {
        os << "#tool=" << nbs::cli::kToolName << "\n#version=" << nbs::cli::kToolVersion
           << "\n#eta2=" << format_double(eta2) << "\n#m=" << m << "\n#tail_tol=" << format_double(policy.tail_tol)
           << "\n#hard_cap=" << policy.hard_cap << "\nn,pmf,cumulative\n";
        for (std::size_t n = 0; n <= last; ++n) {
            const double v = nbs::nbd_pmf(n, p.eta, m);
            cumulative += v;
            os << n << ',' << format_double(v) << ',' << format_double(cumulative.value()) << '\n';
        }
    }
    return 0;
}

int cmd_stats(const GlobalOptions& g, double eta2, double theta, int m) {
    const auto policy = g.policy();
    const auto p = nbs::NbsParams::from_eta2(eta2, theta, m);
    const auto closed = nbs::photon_stats_closed(p);
    const auto psi = nbs::nbs_state(p, policy);
    // The direct column is an oracle for the closed forms, so its amplitudes are
    // cut much deeper than tail_tol: the discarded mass weighted by n^2 would
    // otherwise dominate the comparison.
    const auto oracle_policy = nbs::tightened(policy);
    const auto mo = nbs::expectations(nbs::nbs_state(p, oracle_policy));
    const auto direct = nbs::photon_stats_from_moments(mo);
    const auto quad = nbs::quadrature_from_moments(mo);

    // At eta = 0 the series is not defined; the vacuum values are exact.
    double vp_series = 0.5, vx_series = 0.5;
    if (p.eta > 0.0) {
        vp_series = nbs::var_p_series(p);
        vx_series = nbs::var_x_series(p);
    }

    struct Row {
        const char* name;
        double closed;
        double direct;
    };
    const std::vector<Row> rows = {
        {"mean_n", closed.mean_n, direct.mean_n},
        {"mean_n2", closed.mean_n2, direct.mean_n2},
        {"var_n", closed.var_n, direct.var_n},
        {"mandel_q", closed.mandel_q, direct.mandel_q},
        {"g2", closed.g2, direct.g2},
        {"var_p", vp_series, quad.var_p},
        {"var_x", vx_series, quad.var_x},
        {"uncertainty_product", vp_series * vx_series, quad.uncertainty_product},
    };
    // Absolute below unit magnitude, relative above: var_n grows like M/(1-eta^2)^2
    // while var_p falls towards zero.
    auto discrepancy = [](const Row& r) {
        return std::abs(r.closed - r.direct) / std::max(1.0, std::abs(r.closed));
    };

    Output out(g.out_path);
    auto& os = out.stream();
    if (g.format == "json") {
        json q{{"mean_x", quad.mean_x}, {"mean_p", quad.mean_p}, {"var_x", quad.var_x},
               {"var_p", quad.var_p}, {"uncertainty_product", quad.uncertainty_product}};
        json table = json::array();
        for (const auto& r : rows) {
            table.push_back({{"quantity", r.name},
                             {"closed", number(r.closed)},
                             {"direct", number(r.direct)},
                             {"discrepancy", number(discrepancy(r))}});
        }
        json doc{{"metadata",
                  {{"tool", nbs::cli::kToolName},
                   {"version", nbs::cli::kToolVersion},
                   {"eta2", eta2},
                   {"theta", theta},
                   {"m", m},
                   {"tail_tol", policy.tail_tol},
                   {"hard_cap", policy.hard_cap},
                   {"direct_tail_tol", oracle_policy.tail_tol},
                   {"n_max", psi.n_max()},
                   {"tail_bound", psi.tail_bound()}}},
                 {"quadrature", q},
                 {"rows", table}};
        os << doc.dump(2) << '\n';
    } else {
        os << "#tool=" << nbs::cli::kToolName << "\n#version=" << nbs::cli::kToolVersion
           << "\n#eta2=" << format_double(eta2) << "\n#theta=" << format_double(theta) << "\n#m=" << m
           << "\n#tail_tol=" << format_double(policy.tail_tol) << "\n#hard_cap=" << policy.hard_cap
           << "\n#direct_tail_tol=" << format_double(oracle_policy.tail_tol)
           << "\n#n_max=" << psi.n_max() << "\n#tail_bound=" << format_double(psi.tail_bound())
           << "\n#mean_x=" << format_double(quad.mean_x) << "\n#mean_p=" << format_double(quad.mean_p)
           << "\nquantity,closed,direct,discrepancy\n";
        for (const auto& r : rows) {
            os << r.name << ',' << format_double(r.closed) << ',' << format_double(r.direct) << ','
               << format_double(discrepancy(r)) << '\n';
        }
    }
    return 0;
}

// "name:start:stop:count" or "name=v1,v2,...".
nbs::cli::Axis parse_axis(const std::string& text) {
    if (const auto eq = text.find('='); eq != std::string::npos) {
        nbs::cli::Axis a{nbs::cli::axis_from_string(text.substr(0, eq)), {}};
        std::stringstream ss(text.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ',')) a.values.push_back(std::stod(item));
        return a;
    }
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4) throw nbs::DomainError("axis '" + text + "' is not name:start:stop:count or name=v1,v2");
    const long long count = std::stoll(parts[3]);
    if (count < 1) throw nbs::DomainError("axis count must be >= 1");
    return nbs::cli::Axis::linspace(nbs::cli::axis_from_string(parts[0]), std::stod(parts[1]),
                                    std::stod(parts[2]), static_cast<std::size_t>(count));
}

struct SweepArgs {
    std::vector<std::string> axes;
    double eta2 = 0.5;
    std::optional<double> theta;
    std::optional<double> theta_pi;
    int m = 1;
    bool allow_high_eta2 = false;
    unsigned threads = 0;
    bool no_timestamp = false;
};

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
    const auto policy = g.policy();
    nbs::cli::SweepSpec spec;
    if (!g.preset.empty()) {
        if (!a.axes.empty()) throw nbs::DomainError("--axis cannot be combined with --preset");
        spec = nbs::cli::preset_by_name(g.preset);
    } else {
        bool have[3] = {false, false, false};
        for (const auto& text : a.axes) {
            spec.axes.push_back(parse_axis(text));
            have[static_cast<int>(spec.axes.back().name)] = true;
        }
        using nbs::cli::AxisName;
        if (!have[0]) spec.axes.push_back(nbs::cli::Axis::fixed(AxisName::eta2, a.eta2));
        if (!have[1]) spec.axes.push_back(nbs::cli::Axis::fixed(AxisName::theta, resolve_angle(a.theta, a.theta_pi)));
        if (!have[2]) spec.axes.push_back(nbs::cli::Axis::fixed(AxisName::m, a.m));
    }
    spec.allow_eta2_above_fig_range = a.allow_high_eta2;

    const auto table = nbs::cli::run_sweep(spec, policy, a.threads, a.no_timestamp ? "" : utc_timestamp());
    Output out(g.out_path);
    if (g.format == "json") {
        out.stream() << nbs::cli::to_json(table).dump(2) << '\n';
    } else {
        nbs::cli::write_csv(out.stream(), table);
    }
    if (const auto failed = table.failed_count(); failed > 0) {
        std::cerr << "sweep: " << failed << " of " << table.records.size() << " grid points failed\n";
        for (const auto& r : table.records) {
            if (!r.obs) {
                std::cerr << "sweep: first failure: " << r.error << '\n';
                break;
            }
        }
        return kExitFailed;
    }
    return 0;
}

int cmd_amplifier(const GlobalOptions& g, const nbs::amplifier::AmplifierConfig& cfg) {
    const auto policy = g.policy();
    const auto run = nbs::amplifier::evolve_detailed(cfg, policy);
    const auto analytic = nbs::amplifier::analytic_evolved_state(cfg, policy);
    const auto target = nbs::nbs_state({cfg.eta(), cfg.theta(), cfg.m}, policy);
    const auto& psi = run.state.to_fock();
    const double fid_analytic = nbs::fidelity(psi, analytic.to_fock());
    const double fid_nbs = nbs::fidelity(psi, target);
    const auto mo = nbs::expectations(psi, 1e-8);
    const double sinh_x = std::sinh(cfg.squeeze());

    Output out(g.out_path);
    auto& os = out.stream();
    if (g.format == "json") {
        json rows = json::array();
        for (std::size_t n = 0; n < psi.size(); ++n) {
            rows.push_back({{"n", n},
                            {"signal", run.state.signal_photons(n)},
                            {"idler", run.state.idler_photons(n)},
                            {"re", psi[n].real()},
                            {"im", psi[n].imag()},
                            {"prob", std::norm(psi[n])}});
        }
        json doc{{"metadata",
                  {{"tool", nbs::cli::kToolName},
                   {"version", nbs::cli::kToolVersion},
                   {"chi", cfg.chi},
                   {"omega1", cfg.omega1},
                   {"omega2", cfg.omega2},
                   {"m", cfg.m},
                   {"idler_excess", cfg.idler_excess()},
                   {"t", cfg.t},
                   {"tail_tol", policy.tail_tol},
                   {"hard_cap", policy.hard_cap}}},
                 {"summary",
                  {{"eta", cfg.eta()},
                   {"theta", cfg.theta()},
                   {"n_max", psi.n_max()},
                   {"steps", run.steps},
                   {"max_norm_drift", run.max_norm_drift},
                   {"norm", psi.norm()},
                   {"global_phase", run.state.global_phase},
                   {"fidelity_analytic", fid_analytic},
                   {"fidelity_nbs", fid_nbs},
                   {"mean_n", mo.mean_n},
                   {"mean_n_expected", cfg.m * sinh_x * sinh_x}}},
                 {"rows", rows}};
        os << doc.dump(2) << '\n';
    } else {
        os << "#tool=" << nbs::cli::kToolName << "\n#version=" << nbs::cli::kToolVersion
           << "\n#chi=" << format_double(cfg.chi) << "\n#omega1=" << format_double(cfg.omega1)
           << "\n#omega2=" << format_double(cfg.omega2) << "\n#m=" << cfg.m << "\n#idler_excess=" << cfg.idler_excess()
           << "\n#t=" << format_double(cfg.t) << "\n#eta=" << format_double(cfg.eta())
           << "\n#theta=" << format_double(cfg.theta()) << "\n#steps=" << run.steps
           << "\n#max_norm_drift=" << format_double(run.max_norm_drift)
           << "\n#global_phase=" << format_double(run.state.global_phase)
           << "\n#fidelity_analytic=" << format_double(fid_analytic) << "\n#fidelity_nbs=" << format_double(fid_nbs)
           << "\n#mean_n=" << format_double(mo.mean_n)
           << "\n#mean_n_expected=" << format_double(cfg.m * sinh_x * sinh_x) << "\nn,signal,idler,re,im,prob\n";
        for (std::size_t n = 0; n < psi.size(); ++n) {
            os << n << ',' << run.state.signal_photons(n) << ',' << run.state.idler_photons(n) << ','
               << format_double(psi[n].real()) << ',' << format_double(psi[n].imag()) << ','
               << format_double(std::norm(psi[n])) << '\n';
        }
    }
    return 0;
}

int cmd_verify(const GlobalOptions& g, const std::string& suite, std::optional<double> tolerance) {
    nbs::cli::VerifyOptions opt;
    opt.policy = g.policy();
    opt.tolerance = tolerance;
    const auto checks = nbs::cli::run_verify(suite, opt);
    Output out(g.out_path);
    out.stream() << nbs::cli::to_json(suite, checks).dump(2) << '\n';
    return nbs::cli::all_passed(checks) ? 0 : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Negative binomial states: construction, statistics, squeezing and generation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--tail-tol", g.tail_tol, "Maximum discarded probability mass (default 1e-12)");
    app.add_option("--hard-cap", g.hard_cap, "Largest photon number kept (default 2^20)");
    app.add_option("--config", g.config_path, "key=value file with tail_tol / hard_cap")->check(CLI::ExistingFile);
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", g.out_path, "Output path (stdout when omitted)");
    app.add_option("--preset", g.preset, "Sweep preset")->check(CLI::IsMember({"fig1", "fig2"}));

    double eta2 = 0.5;
    int m = 1;
    std::optional<double> theta, theta_pi;
    std::optional<std::size_t> n_upto;

    auto* pmf = app.add_subcommand("pmf", "Negative binomial photon distribution");
    pmf->add_option("--eta2", eta2, "eta^2 in [0, 1)")->required();
    pmf->add_option("--m", m, "order M >= 1")->required();
    pmf->add_option("--n-upto", n_upto, "Last n printed (default: truncation point)");

    auto* stats = app.add_subcommand("stats", "Photon statistics and quadrature variances, closed form vs direct");
    stats->add_option("--eta2", eta2, "eta^2 in [0, 1)")->required();
    stats->add_option("--m", m, "order M >= 1")->required();
    stats->add_option("--theta", theta, "phase in radians");
    stats->add_option("--theta-pi", theta_pi, "phase in multiples of pi");

    SweepArgs sa;
    auto* sweep = app.add_subcommand("sweep", "Grid evaluation over (eta^2, theta, M)");
    sweep->add_option("--axis", sa.axes, "name:start:stop:count or name=v1,v2,... (name: eta2, theta, m)");
    sweep->add_option("--eta2", sa.eta2, "fixed eta^2 when not swept");
    sweep->add_option("--theta", sa.theta, "fixed theta (radians) when not swept");
    sweep->add_option("--theta-pi", sa.theta_pi, "fixed theta in multiples of pi when not swept");
    sweep->add_option("--m", sa.m, "fixed M when not swept");
    sweep->add_flag("--allow-high-eta2", sa.allow_high_eta2, "permit eta^2 above 0.99 (still < 1)");
    sweep->add_option("--threads", sa.threads, "worker threads (0 = hardware concurrency)");
    sweep->add_flag("--no-timestamp", sa.no_timestamp, "omit the timestamp metadata line");

    nbs::amplifier::AmplifierConfig cfg;
    auto* amp = app.add_subcommand("amplifier", "Parametric amplifier evolution from |0, M-1>");
    amp->add_option("--chi", cfg.chi, "coupling constant > 0");
    amp->add_option("--omega1", cfg.omega1, "signal frequency > 0");
    amp->add_option("--omega2", cfg.omega2, "idler frequency > 0");
    amp->add_option("--m", cfg.m, "order M of the generated state (idler excess M-1)");
    amp->add_option("--t", cfg.t, "evolution time >= 0")->required();

    std::string suite = "all";
    std::optional<double> tolerance;
    auto* verify = app.add_subcommand("verify", "Run identity checks and report residuals as JSON");
    verify->add_option("--suite", suite, "algebra, statistics, amplifier, limits or all");
    verify->add_option("--tolerance", tolerance, "override every check threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*pmf) return cmd_pmf(g, eta2, m, n_upto);
        if (*stats) return cmd_stats(g, eta2, resolve_angle(theta, theta_pi), m);
        if (*sweep) return cmd_sweep(g, sa);
        if (*amp) return cmd_amplifier(g, cfg);
        if (*verify) return cmd_verify(g, suite, tolerance);
    } catch (const nbs::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
