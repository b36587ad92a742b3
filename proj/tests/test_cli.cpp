#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapekin/io.hpp"
#include "shapekin/poly.hpp"

namespace fs = std::filesystem;
using namespace shapekin;

namespace {

const char* kCli = SHAPEKIN_CLI_PATH;
const char* kScenarioDir = SHAPEKIN_SCENARIO_DIR;

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("shapekin_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& subcommand, const fs::path& config, const fs::path& out) {
    const std::string cmd = std::string(kCli) + " " + subcommand + " --config " +
                            config.string() + " --out " + out.string() +
                            " --quiet > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

nlohmann::json summary_of(const fs::path& dir) {
    return nlohmann::json::parse(slurp(dir / "summary.json"));
}

}  // namespace

TEST(Cli, BundledScenariosAreDeterministic) {
    const std::vector<std::pair<std::string, std::string>> scenarios = {
        {"evolve", "rigid_rotation.json"},        {"evolve", "uniaxial_stretch.json"},
        {"evolve", "plastic_exponential.json"},   {"evolve", "large_shear_power.json"},
        {"compat", "compat_potential.json"},      {"compat", "compat_incompatible.json"},
        {"sweep", "sweep_potential.json"},        {"reconstruct", "reconstruct_poly.json"},
    };
    for (const auto& [cmd, name] : scenarios) {
        const fs::path cfg = fs::path(kScenarioDir) / name;
        const fs::path out1 = fresh_dir(name + ".a");
        const fs::path out2 = fresh_dir(name + ".b");
        ASSERT_EQ(run(cmd, cfg, out1), 0) << name;
        ASSERT_EQ(run(cmd, cfg, out2), 0) << name;
        for (const auto& entry : fs::directory_iterator(out1)) {
            const fs::path twin = out2 / entry.path().filename();
            ASSERT_TRUE(fs::exists(twin)) << entry.path();
            EXPECT_EQ(slurp(entry.path()), slurp(twin)) << "nondeterministic " << entry.path();
        }
    }
}

TEST(Cli, SummariesCarryHashAndVersion) {
    const fs::path out = fresh_dir("hash");
    ASSERT_EQ(run("evolve", fs::path(kScenarioDir) / "rigid_rotation.json", out), 0);
    const nlohmann::json s = summary_of(out);
    EXPECT_EQ(s.at("tool"), "shapekin");
    EXPECT_EQ(s.at("version"), "0.1.0");
    EXPECT_EQ(s.at("config_hash").get<std::string>().size(), 16u);
    EXPECT_EQ(s.at("elastic_identity"), "pass");
}

TEST(Cli, UniaxialTrajectoryMatchesClosedForm) {
    const fs::path out = fresh_dir("uniaxial");
    ASSERT_EQ(run("evolve", fs::path(kScenarioDir) / "uniaxial_stretch.json", out), 0);
    std::ifstream is(out / "trajectory.csv");
    std::string line, last;
    std::getline(is, line);  // header
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    std::vector<std::string> cells;
    std::stringstream ls(last);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);

    const auto col = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return std::stod(cells[c]);
        ADD_FAILURE() << "missing column " << name;
        return 0.0;
    };
    EXPECT_NEAR(col("t"), 1.0, 1e-12);
    EXPECT_NEAR(col("D_xx"), 0.4, 1e-8);  // stretch rate 0.4 for one unit of time
    EXPECT_NEAR(col("D_yy"), 0.0, 1e-10);
    EXPECT_NEAR(col("vol_ratio"), std::exp(0.4), 1e-8);
}

TEST(Cli, PlasticExponentialMatchesClosedForm) {
    const fs::path out = fresh_dir("plastic_exp");
    ASSERT_EQ(run("evolve", fs::path(kScenarioDir) / "plastic_exponential.json", out), 0);
    // Law scale -0.6 = -2 beta with L = 0: A(t) = e^{0.6 t} I.
    std::ifstream is(out / "trajectory.csv");
    std::string line, last;
    std::getline(is, line);
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    std::stringstream ls(last);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
    EXPECT_NEAR(cells[2], std::exp(0.6), 1e-8);   // A_xx
    EXPECT_NEAR(cells[6], std::exp(0.6), 1e-8);   // A_yy
    EXPECT_NEAR(cells[11], 0.3, 1e-9);            // D_xx = beta t
    const nlohmann::json s = summary_of(out);
    EXPECT_TRUE(s.at("plastic_active").get<bool>());
}

TEST(Cli, RigidRotationDeformednessStaysZero) {
    const fs::path out = fresh_dir("rigid_cols");
    ASSERT_EQ(run("evolve", fs::path(kScenarioDir) / "rigid_rotation.json", out), 0);
    std::ifstream is(out / "trajectory.csv");
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
        for (int c = 11; c < 20; ++c) EXPECT_LT(std::abs(cells[c]), 1e-9);  // D columns
    }
}

TEST(Cli, MetricBlockIsParsedAndValidated) {
    const fs::path dir = fresh_dir("metric");
    const fs::path good = dir / "good.json";
    std::ofstream(good) << R"({
        "motion": {"kind": "uniaxial", "stretch": {"type": "exp", "amplitude": 1.0, "rate": 0.2}},
        "metric": [[1.0, 0.0, 0.0], [0.0, 2.5, 0.1], [0.0, 0.1, 1.0]],
        "time": {"t0": 0.0, "t1": 0.5, "dt": 0.01}
    })";
    EXPECT_EQ(run("evolve", good, dir / "out_good"), 0);

    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({
        "motion": {"kind": "identity"},
        "metric": [[1.0, 0.0, 0.0], [0.0, -2.5, 0.0], [0.0, 0.0, 1.0]],
        "time": {"t0": 0.0, "t1": 0.5, "dt": 0.01}
    })";
    EXPECT_EQ(run("evolve", bad, dir / "out_bad"), 2);
}

TEST(Cli, ConfigErrorsExitWithCode2) {
    const fs::path dir = fresh_dir("config_errors");
    const fs::path out = dir / "out";

    EXPECT_EQ(run("evolve", dir / "missing.json", out), 2);

    const fs::path bad_json = dir / "bad.json";
    std::ofstream(bad_json) << "{ not json";
    EXPECT_EQ(run("evolve", bad_json, out), 2);

    const fs::path bad_dt = dir / "bad_dt.json";
    std::ofstream(bad_dt) << R"({
        "motion": {"kind": "identity"},
        "time": {"t0": 0.0, "t1": 1.0, "dt": -0.5}
    })";
    EXPECT_EQ(run("evolve", bad_dt, out), 2);

    const fs::path bad_kind = dir / "bad_kind.json";
    std::ofstream(bad_kind) << R"({
        "motion": {"kind": "warp-drive"},
        "time": {"t0": 0.0, "t1": 1.0, "dt": 0.1}
    })";
    EXPECT_EQ(run("evolve", bad_kind, out), 2);

    const fs::path mismatch = dir / "mismatch.json";
    std::ofstream(mismatch) << R"({
        "command": "compat",
        "motion": {"kind": "identity"},
        "time": {"t0": 0.0, "t1": 1.0, "dt": 0.1}
    })";
    EXPECT_EQ(run("evolve", mismatch, out), 2);
}

TEST(Cli, NumericalFailureExitsWithCode3) {
    const fs::path dir = fresh_dir("numeric_error");
    const fs::path cfg = dir / "blowup.json";
    // Large prescribed metric change drives the shape out of positivity.
    std::ofstream(cfg) << R"({
        "motion": {"kind": "identity"},
        "time": {"t0": 0.0, "t1": 1.0, "dt": 0.01},
        "plastic_law": {
            "kind": "prescribed",
            "mode": "tensor",
            "tensor": [[50.0, 0.0, 0.0], [0.0, 50.0, 0.0], [0.0, 0.0, 50.0]]
        }
    })";
    EXPECT_EQ(run("evolve", cfg, dir / "out"), 3);
}

TEST(Cli, IncompatibleStrainExitsWithCode4AndCsvRoundTripWorks) {
    const fs::path dir = fresh_dir("reconstruct_csv");

    // Compatible strain from a quadratic displacement, dumped to CSV.
    const Grid3 grid = Grid3::box(Vec3::Zero(), Vec3::Ones(), {9, 9, 9});
    const PolyVec3 w(PolyScalar({{0.2, 2, 0, 0}, {0.3, 0, 1, 1}}),
                     PolyScalar({{-0.15, 0, 2, 0}, {0.25, 1, 0, 1}}),
                     PolyScalar({{0.12, 1, 1, 0}}));
    const Field e = Field::sample_tensor(grid, [&](const Vec3& x) {
        const Ten3 gw = w.jacobian(x);
        return Ten3(0.5 * (gw + gw.transpose()));
    });
    {
        std::ofstream os(dir / "e_field.csv", std::ios::binary);
        io::write_field_csv(os, e, io::tensor_comp_names("E"));
    }
    const fs::path cfg = dir / "from_csv.json";
    std::ofstream(cfg) << R"({
        "command": "reconstruct",
        "strain_field": "e_field.csv",
        "base_point": [0.0, 0.0, 0.0],
        "output": {"field": "u_field.csv", "summary": "summary.json"}
    })";
    ASSERT_EQ(run("reconstruct", cfg, dir / "out"), 0);
    const nlohmann::json s = summary_of(dir / "out");
    EXPECT_LT(s.at("verification_rms").get<double>(), 1e-10);

    // The emitted potential field reproduces the strain.
    std::ifstream uf(dir / "out" / "u_field.csv", std::ios::binary);
    const Field u = io::read_field_csv(uf);
    const Field gu = grad(u);
    double worst = 0.0;
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j)
            for (int k = 0; k < 9; ++k) {
                const Ten3 sym = 0.5 * (gu.tensor_at(i, j, k) + gu.tensor_at(i, j, k).transpose());
                worst = std::max(worst, (sym - e.tensor_at(i, j, k)).norm());
            }
    EXPECT_LT(worst, 1e-10);

    // Incompatible input is refused with exit code 4.
    const Field bad = Field::sample_tensor(grid, [](const Vec3& x) {
        Ten3 m = Ten3::Zero();
        m(0, 0) = x.y() * x.y();
        return m;
    });
    {
        std::ofstream os(dir / "bad_field.csv", std::ios::binary);
        io::write_field_csv(os, bad, io::tensor_comp_names("E"));
    }
    const fs::path bad_cfg = dir / "bad.json";
    std::ofstream(bad_cfg) << R"({
        "command": "reconstruct",
        "strain_field": "bad_field.csv"
    })";
    EXPECT_EQ(run("reconstruct", bad_cfg, dir / "out_bad"), 4);
}
