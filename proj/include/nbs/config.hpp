#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <string>

#include "nbs/errors.hpp"
#include "nbs/fock.hpp"

namespace nbs::cli {

/// Overrides read from a key=value file. Blank lines and '#' comments are skipped.
/// Recognized keys: tail_tol, hard_cap.
struct PolicyOverrides {
    std::optional<double> tail_tol;
    std::optional<std::size_t> hard_cap;

    void apply_to(TruncationPolicy& policy) const {
        if (tail_tol) policy.tail_tol = *tail_tol;
        if (hard_cap) policy.hard_cap = *hard_cap;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace detail

inline PolicyOverrides parse_config(std::istream& in) {
    PolicyOverrides out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        try {
            std::size_t used = 0;
            if (key == "tail_tol") {
                out.tail_tol = std::stod(value, &used);
            } else if (key == "hard_cap") {
                const long long v = std::stoll(value, &used);
                if (v < 1) throw DomainError("hard_cap must be >= 1");
                out.hard_cap = static_cast<std::size_t>(v);
            } else {
                throw DomainError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
            }
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw DomainError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return out;
}

inline PolicyOverrides load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path);
    return parse_config(in);
}

}  // namespace nbs::cli
