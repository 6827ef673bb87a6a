#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"
#include "nbs/states.hpp"
#include "nbs/stats.hpp"

namespace nbs::cli {

inline constexpr const char* kToolName = "nbs-lab";
inline constexpr const char* kToolVersion = "1.0.0";

enum class AxisName { eta2, theta, m };

inline const char* to_string(AxisName a) {
    switch (a) {
        case AxisName::eta2: return "eta2";
        case AxisName::theta: return "theta";
        case AxisName::m: return "m";
    }
    return "?";
}

inline AxisName axis_from_string(const std::string& s) {
    if (s == "eta2") return AxisName::eta2;
    if (s == "theta") return AxisName::theta;
    if (s == "m") return AxisName::m;
    throw DomainError("unknown axis '" + s + "' (expected eta2, theta or m)");
}

struct Axis {
    AxisName name = AxisName::eta2;
    std::vector<double> values;

    // count points from start to stop inclusive; the last point is exactly stop.
    static Axis linspace(AxisName name, double start, double stop, std::size_t count) {
        if (count < 1) throw DomainError(std::string("axis ") + to_string(name) + ": count must be >= 1");
        if (!(start <= stop)) throw DomainError(std::string("axis ") + to_string(name) + ": start > stop");
        if (count > 1 && start == stop) {
            throw DomainError(std::string("axis ") + to_string(name) + ": count > 1 needs start < stop");
        }
        Axis a{name, {}};
        a.values.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            a.values.push_back(i + 1 == count ? stop : start + (stop - start) * frac);
        }
        return a;
    }

    static Axis fixed(AxisName name, double v) { return Axis{name, {v}}; }
};

/// Grid of (eta^2, theta, M) points. Axes are listed outermost first; every
/// parameter appears exactly once (unswept ones as single-value axes).
struct SweepSpec {
    std::vector<Axis> axes;
    bool allow_eta2_above_fig_range = false;  // lifts the default eta^2 <= 0.99 cap
    std::string preset;                       // informational, copied to metadata
    std::string note;

    void validate() const {
        if (axes.size() != 3) throw DomainError("sweep needs exactly the three axes eta2, theta, m");
        bool seen[3] = {false, false, false};
        for (const auto& a : axes) {
            const auto idx = static_cast<int>(a.name);
            if (seen[idx]) throw DomainError(std::string("axis ") + to_string(a.name) + " given twice");
            seen[idx] = true;
            if (a.values.empty()) throw DomainError(std::string("axis ") + to_string(a.name) + " is empty");
            for (double v : a.values) {
                if (!std::isfinite(v)) throw DomainError(std::string("axis ") + to_string(a.name) + ": non-finite value");
                if (a.name == AxisName::eta2) {
                    const double cap = allow_eta2_above_fig_range ? 1.0 : 0.99;
                    const bool ok = v >= 0.0 && (allow_eta2_above_fig_range ? v < cap : v <= cap);
                    if (!ok) {
                        throw DomainError("eta2 value " + format_value(v) + " outside " +
                                          (allow_eta2_above_fig_range ? "[0, 1)" : "[0, 0.99]"));
                    }
                }
                if (a.name == AxisName::m && (v < 1.0 || v != std::floor(v))) {
                    throw DomainError("m values must be integers >= 1");
                }
            }
        }
    }

    [[nodiscard]] std::size_t point_count() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.values.size();
        return n;
    }
};

/// Fig. 1 data: theta = 0, M in {1, 5, 50}, eta^2 = 0, 0.01, ..., 0.99.
inline SweepSpec preset_fig1() {
    SweepSpec s;
    s.axes = {Axis{AxisName::m, {1.0, 5.0, 50.0}}, Axis::fixed(AxisName::theta, 0.0),
              Axis::linspace(AxisName::eta2, 0.0, 0.99, 100)};
    s.preset = "fig1";
    s.note = "eta2 sampled at 0.01 spacing on [0, 0.99]";
    return s;
}

/// Fig. 2 data: M = 1, eta^2 in {0.2, 0.5, 0.7, 0.9}, 257 theta points on [0, pi].
inline SweepSpec preset_fig2() {
    SweepSpec s;
    s.axes = {Axis::fixed(AxisName::m, 1.0), Axis{AxisName::eta2, {0.2, 0.5, 0.7, 0.9}},
              Axis::linspace(AxisName::theta, 0.0, std::numbers::pi, 257)};
    s.preset = "fig2";
    s.note = "theta sampled at 257 uniform points on [0, pi]";
    return s;
}

inline SweepSpec preset_by_name(const std::string& name) {
    if (name == "fig1") return preset_fig1();
    if (name == "fig2") return preset_fig2();
    throw DomainError("unknown preset '" + name + "' (expected fig1 or fig2)");
}

struct Observables {
    double var_p = 0.0;
    double var_x = 0.0;
    double mandel_q = 0.0;  // NaN at the vacuum
    double g2 = 0.0;        // NaN at the vacuum
    double mean_n = 0.0;
    double tail_bound = 0.0;
    std::size_t n_max = 0;
};

struct SweepRecord {
    std::vector<double> coords;  // in axis order
    std::optional<Observables> obs;
    std::string error;           // set iff !obs
};

inline const std::vector<std::string>& observable_columns() {
    static const std::vector<std::string> cols = {"var_p", "var_x", "mandel_q", "g2",
                                                  "mean_n", "tail_bound", "n_max"};
    return cols;
}

struct SweepTable {
    std::vector<std::string> coord_columns;
    std::vector<SweepRecord> records;
    // ordered key/value metadata; "timestamp" is excluded from reproducibility checks
    std::vector<std::pair<std::string, std::string>> metadata;

    [[nodiscard]] std::size_t failed_count() const {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(), [](const SweepRecord& r) { return !r.obs; }));
    }
};

inline Observables evaluate_point(double eta2, double theta, int m, const TruncationPolicy& policy) {
    const NbsParams p = NbsParams::from_eta2(eta2, theta, m);
    const FockVector psi = nbs_state(p, policy);
    const Moments mo = expectations(psi, std::max(1e-9, 10.0 * policy.tail_tol));
    const PhotonStats ps = photon_stats_from_moments(mo);
    const QuadratureReport q = quadrature_from_moments(mo);
    return {q.var_p, q.var_x, ps.mandel_q, ps.g2, ps.mean_n, psi.tail_bound(), psi.n_max()};
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Evaluates every grid point. Points are computed on `threads` workers but the
/// table is always in grid order. A failing point (e.g. cap exceeded) yields a
/// record carrying the error message instead of observables.
inline SweepTable run_sweep(const SweepSpec& spec, const TruncationPolicy& policy,
                            unsigned threads = 0, const std::string& timestamp = {}) {
    spec.validate();
    policy.validate();
    SweepTable table;
    for (const auto& a : spec.axes) table.coord_columns.emplace_back(to_string(a.name));

    const std::size_t total = spec.point_count();
    table.records.resize(total);
    std::vector<std::size_t> strides(spec.axes.size(), 1);
    for (std::size_t i = spec.axes.size(); i-- > 1;) strides[i - 1] = strides[i] * spec.axes[i].values.size();

    auto work = [&](std::size_t idx) {
        SweepRecord& rec = table.records[idx];
        double eta2 = 0.0, theta = 0.0;
        int m = 1;
        for (std::size_t k = 0; k < spec.axes.size(); ++k) {
            const auto& ax = spec.axes[k];
            const double v = ax.values[(idx / strides[k]) % ax.values.size()];
            rec.coords.push_back(v);
            switch (ax.name) {
                case AxisName::eta2: eta2 = v; break;
                case AxisName::theta: theta = v; break;
                case AxisName::m: m = static_cast<int>(v); break;
            }
        }
        try {
            rec.obs = evaluate_point(eta2, theta, m, policy);
        } catch (const Error& e) {
            rec.error = e.what();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < total; i = next++) work(i);
            });
        }
    }

    std::ostringstream grid;
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        if (k) grid << ' ';
        grid << to_string(spec.axes[k].name) << ':' << spec.axes[k].values.size();
    }
    table.metadata = {{"tool", kToolName},
                      {"version", kToolVersion},
                      {"tail_tol", format_double(policy.tail_tol)},
                      {"hard_cap", std::to_string(policy.hard_cap)},
                      {"preset", spec.preset.empty() ? "custom" : spec.preset},
                      {"grid", grid.str()},
                      {"note", spec.note}};
    if (!timestamp.empty()) table.metadata.emplace_back("timestamp", timestamp);
    return table;
}

inline constexpr const char* kErrorMarker = "error";

/// `#key=value` metadata lines, one header row, then one row per record.
inline void write_csv(std::ostream& out, const SweepTable& table) {
    for (const auto& [k, v] : table.metadata) out << '#' << k << '=' << v << '\n';
    bool first = true;
    for (const auto& c : table.coord_columns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    for (const auto& c : observable_columns()) out << ',' << c;
    out << '\n';
    for (const auto& r : table.records) {
        for (std::size_t k = 0; k < r.coords.size(); ++k) out << (k ? "," : "") << format_double(r.coords[k]);
        if (r.obs) {
            const auto& o = *r.obs;
            out << ',' << format_double(o.var_p) << ',' << format_double(o.var_x) << ','
                << format_double(o.mandel_q) << ',' << format_double(o.g2) << ',' << format_double(o.mean_n)
                << ',' << format_double(o.tail_bound) << ',' << o.n_max;
        } else {
            for (std::size_t k = 0; k < observable_columns().size(); ++k) out << ',' << kErrorMarker;
        }
        out << '\n';
    }
}

inline nlohmann::ordered_json json_number(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

/// {"metadata": {...}, "rows": [{coords..., observables..., "error": null|msg}]}
inline nlohmann::ordered_json to_json(const SweepTable& table) {
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : table.metadata) meta[k] = v;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : table.records) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t k = 0; k < r.coords.size(); ++k) obj[table.coord_columns[k]] = r.coords[k];
        if (r.obs) {
            const auto& o = *r.obs;
            obj["var_p"] = json_number(o.var_p);
            obj["var_x"] = json_number(o.var_x);
            obj["mandel_q"] = json_number(o.mandel_q);
            obj["g2"] = json_number(o.g2);
            obj["mean_n"] = json_number(o.mean_n);
            obj["tail_bound"] = json_number(o.tail_bound);
            obj["n_max"] = o.n_max;
            obj["error"] = nullptr;
        } else {
            for (const auto& c : observable_columns()) obj[c] = nullptr;
            obj["error"] = r.error;
        }
        rows.push_back(std::move(obj));
    }
    return nlohmann::ordered_json{{"metadata", meta}, {"rows", rows}};
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw DomainError("bad number '" + s + "' in CSV");
    return v;
}

}  // namespace detail

/// Inverse of write_csv.
inline SweepTable read_csv(std::istream& in) {
    SweepTable table;
    std::string line;
    bool have_header = false;
    std::size_t n_coords = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            table.metadata.emplace_back(line.substr(1, eq - 1), line.substr(eq + 1));
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (!have_header) {
            const auto& obs = observable_columns();
            if (cells.size() < obs.size()) throw DomainError("CSV header too short");
            n_coords = cells.size() - obs.size();
            table.coord_columns.assign(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(n_coords));
            have_header = true;
            continue;
        }
        if (cells.size() != n_coords + observable_columns().size()) throw DomainError("CSV row has wrong width");
        SweepRecord r;
        for (std::size_t k = 0; k < n_coords; ++k) r.coords.push_back(detail::parse_double(cells[k]));
        if (cells[n_coords] == kErrorMarker) {
            r.error = kErrorMarker;
        } else {
            Observables o;
            o.var_p = detail::parse_double(cells[n_coords + 0]);
            o.var_x = detail::parse_double(cells[n_coords + 1]);
            o.mandel_q = detail::parse_double(cells[n_coords + 2]);
            o.g2 = detail::parse_double(cells[n_coords + 3]);
            o.mean_n = detail::parse_double(cells[n_coords + 4]);
            o.tail_bound = detail::parse_double(cells[n_coords + 5]);
            o.n_max = static_cast<std::size_t>(std::stoull(cells[n_coords + 6]));
            r.obs = o;
        }
        table.records.push_back(std::move(r));
    }
    return table;
}

}  // namespace nbs::cli
