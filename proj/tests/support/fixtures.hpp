#pragma once

// Shared, lazily built models and solved surfaces. Each test binary builds
// them at most once.

#include <memory>

#include "bcsgap/pipeline.hpp"

namespace fixture {

inline bcsgap::RunConfig constant_config(double u0 = 0.30) {
    bcsgap::RunConfig c;
    c.u0 = u0;
    return c;
}

inline bcsgap::RunConfig bump_config() {
    bcsgap::RunConfig c;
    c.potential_type = "gaussian_bump";
    c.base = 0.29;
    c.amplitude = 0.02;
    c.width = 0.05;
    return c;
}

inline const bcsgap::Model& constant_model() {
    static const auto m = bcsgap::build_model(constant_config());
    return *m;
}

inline const bcsgap::Model& bump_model() {
    static const auto m = bcsgap::build_model(bump_config());
    return *m;
}

inline double constant_tc() {
    static const double t = bcsgap::critical_temperature(constant_model().op, constant_model().envelope).t_c;
    return t;
}

inline const bcsgap::GapSurface& constant_surface() {
    static const auto s = [] {
        const auto& m = constant_model();
        bcsgap::SurfaceOptions o;
        o.tau = m.envelope.lower().tau();
        return bcsgap::solve_surface(m.op, m.envelope, constant_tc(), o);
    }();
    return s;
}

inline const bcsgap::ThermoReport& constant_thermo() {
    static const auto r = bcsgap::run_thermo(constant_surface(), constant_model().op, constant_model().params);
    return r;
}

}  // namespace fixture
