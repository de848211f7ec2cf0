#pragma once

// Run configuration: flat `key = value` lines with dotted section prefixes,
// `#` comments. Unknown keys are rejected.

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "bcsgap/errors.hpp"
#include "bcsgap/model.hpp"

namespace bcsgap {

struct RunConfig {
    RawParams params;
    bool u_lower_given = false;
    bool u_upper_given = false;

    std::string potential_type = "constant";
    double u0 = 0.30;
    double base = 0.30;
    double amplitude = 0.0;
    double width = 0.1;
    std::string csv;

    std::size_t panels = 16;
    std::size_t order = 10;

    double tol = 1e-12;
    std::size_t max_iter = 5'000'000;
    std::size_t t_resolution = 24;
    std::optional<double> solver_tau;
    unsigned threads = 0;

    double margin = 0.03;
    std::optional<double> certificate_tau;

    std::string output_dir = "out";
    std::uint64_t seed = 42;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw InvalidParameter(std::string(key), "expected a finite number, got '" + s + "'");
    return v;
}

template <class I>
I parse_integer(std::string_view key, std::string_view text) {
    I v{};
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw InvalidParameter(std::string(key), "expected a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
        s = detail::trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw InvalidParameter("config", "line " + std::to_string(lineno) + ": expected key = value");
        const auto key = detail::trim(s.substr(0, eq));
        const auto val = detail::trim(s.substr(eq + 1));
        auto num = [&] { return detail::parse_double(key, val); };
        auto count = [&] { return detail::parse_integer<std::size_t>(key, val); };

        if (key == "params.hbar_omega_d") c.params.hbar_omega_d = num();
        else if (key == "params.epsilon") c.params.epsilon_cutoff = num();
        else if (key == "params.n0") c.params.n0_dos = num();
        else if (key == "params.u_lower") c.params.u_lower = num(), c.u_lower_given = true;
        else if (key == "params.u_upper") c.params.u_upper = num(), c.u_upper_given = true;
        else if (key == "potential.type") c.potential_type = std::string(val);
        else if (key == "potential.u0") c.u0 = num();
        else if (key == "potential.base") c.base = num();
        else if (key == "potential.amplitude") c.amplitude = num();
        else if (key == "potential.width") c.width = num();
        else if (key == "potential.csv") c.csv = std::string(val);
        else if (key == "grid.panels") c.panels = count();
        else if (key == "grid.order") c.order = count();
        else if (key == "solver.tol") c.tol = num();
        else if (key == "solver.max_iter") c.max_iter = count();
        else if (key == "solver.t_resolution") c.t_resolution = count();
        else if (key == "solver.tau") c.solver_tau = num();
        else if (key == "solver.threads") c.threads = detail::parse_integer<unsigned>(key, val);
        else if (key == "certificate.margin") c.margin = num();
        else if (key == "certificate.tau") c.certificate_tau = num();
        else if (key == "output.dir") c.output_dir = std::string(val);
        else if (key == "seed") c.seed = detail::parse_integer<std::uint64_t>(key, val);
        else throw InvalidParameter(std::string(key), "unknown config key (line " + std::to_string(lineno) + ")");
    }

    if (c.potential_type != "constant" && c.potential_type != "gaussian_bump" && c.potential_type != "table")
        throw InvalidParameter("potential.type", "expected constant, gaussian_bump or table");
    if (c.potential_type == "table" && c.csv.empty())
        throw InvalidParameter("potential.csv", "required for potential.type = table");
    if (c.panels < 1 || c.order < 2) throw InvalidParameter("grid", "need panels >= 1 and order >= 2");
    if (!(c.tol > 0.0)) throw InvalidParameter("solver.tol", "must be > 0");
    if (c.t_resolution < 8) throw InvalidParameter("solver.t_resolution", "must be >= 8");
    if (!(c.margin > 0.0 && c.margin < 1.0)) throw InvalidParameter("certificate.margin", "must lie in (0, 1)");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("config", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto c = parse_config(ss.str());
    // table paths are relative to the config file
    if (!c.csv.empty() && std::filesystem::path(c.csv).is_relative())
        c.csv = (std::filesystem::path(path).parent_path() / c.csv).string();
    return c;
}

}  // namespace bcsgap
