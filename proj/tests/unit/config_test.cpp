#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bcsgap/config.hpp"

using namespace bcsgap;

TEST(Config, DefaultsFromEmptyText) {
    const auto c = parse_config("");
    EXPECT_EQ(c.potential_type, "constant");
    EXPECT_DOUBLE_EQ(c.u0, 0.30);
    EXPECT_EQ(c.panels, 16u);
    EXPECT_EQ(c.order, 10u);
    EXPECT_FALSE(c.u_lower_given);
    EXPECT_FALSE(c.solver_tau.has_value());
}

TEST(Config, ParsesEveryKey) {
    const auto c = parse_config(R"(
# comment line
params.hbar_omega_d = 2.0
params.epsilon = 0.01   # trailing comment
params.n0 = 3
params.u_lower = 0.2
params.u_upper = 0.4
potential.type = gaussian_bump
potential.base = 0.25
potential.amplitude = 0.05
potential.width = 0.2
grid.panels = 20
grid.order = 8
solver.tol = 1e-10
solver.max_iter = 1000
solver.t_resolution = 12
solver.tau = 0.05
solver.threads = 2
certificate.margin = 0.05
certificate.tau = 0.06
output.dir = results
seed = 7
)");
    EXPECT_DOUBLE_EQ(c.params.hbar_omega_d, 2.0);
    EXPECT_DOUBLE_EQ(c.params.epsilon_cutoff, 0.01);
    EXPECT_DOUBLE_EQ(c.params.n0_dos, 3.0);
    EXPECT_TRUE(c.u_lower_given && c.u_upper_given);
    EXPECT_EQ(c.potential_type, "gaussian_bump");
    EXPECT_DOUBLE_EQ(c.amplitude, 0.05);
    EXPECT_EQ(c.panels, 20u);
    EXPECT_EQ(c.max_iter, 1000u);
    EXPECT_DOUBLE_EQ(*c.solver_tau, 0.05);
    EXPECT_EQ(c.threads, 2u);
    EXPECT_DOUBLE_EQ(*c.certificate_tau, 0.06);
    EXPECT_EQ(c.output_dir, "results");
    EXPECT_EQ(c.seed, 7u);
}

TEST(Config, Rejects) {
    EXPECT_THROW(parse_config("params.bogus = 1"), InvalidParameter);
    EXPECT_THROW(parse_config("no equals sign"), InvalidParameter);
    EXPECT_THROW(parse_config("params.epsilon = abc"), InvalidParameter);
    EXPECT_THROW(parse_config("params.epsilon = inf"), InvalidParameter);
    EXPECT_THROW(parse_config("grid.panels = -3"), InvalidParameter);
    EXPECT_THROW(parse_config("grid.order = 1"), InvalidParameter);
    EXPECT_THROW(parse_config("potential.type = cubic"), InvalidParameter);
    EXPECT_THROW(parse_config("potential.type = table"), InvalidParameter);
    EXPECT_THROW(parse_config("solver.tol = 0"), InvalidParameter);
    EXPECT_THROW(parse_config("solver.t_resolution = 4"), InvalidParameter);
    EXPECT_THROW(parse_config("certificate.margin = 1.5"), InvalidParameter);
}

TEST(Config, ErrorNamesTheKey) {
    try {
        parse_config("solver.tol = -1");
        FAIL();
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("solver.tol"), std::string::npos);
    }
}

TEST(Config, LoadResolvesTablePathAgainstConfigDir) {
    const auto dir = std::filesystem::temp_directory_path() / "bcsgap_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "run.cfg");
        f << "potential.type = table\npotential.csv = u.csv\n";
    }
    const auto c = load_config((dir / "run.cfg").string());
    EXPECT_EQ(std::filesystem::path(c.csv), dir / "u.csv");
    EXPECT_THROW(load_config((dir / "missing.cfg").string()), InvalidParameter);
    std::filesystem::remove_all(dir);
}
