// Scenario runner: parses a JSON config, executes an evolution, compatibility,
// sweep or reconstruction pipeline, and emits CSV dumps plus a JSON summary.
// Outputs are deterministic: fixed column order, 17-significant-digit floats,
// and a config hash embedded in every summary.
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 incompatible input.

#include <clocale>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapekin/shapekin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace shapekin;

namespace {

struct RunContext {
    fs::path config_path;
    fs::path config_dir;
    fs::path out_dir;
    std::string config_hash;
    unsigned seed = 0;
    bool quiet = false;
};

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at " + where + ": " + what);
}

const json& need(const json& node, const char* key, const std::string& where) {
    if (!node.is_object() || !node.contains(key)) config_fail(where, std::string("missing '") + key + "'");
    return node.at(key);
}

double need_number(const json& node, const char* key, const std::string& where) {
    const json& v = need(node, key, where);
    if (!v.is_number()) config_fail(where + "/" + key, "expected a number");
    return v.get<double>();
}

Vec3 parse_vec3(const json& node, const std::string& where) {
    if (!node.is_array() || node.size() != 3) config_fail(where, "expected an array of 3 numbers");
    return Vec3(node[0].get<double>(), node[1].get<double>(), node[2].get<double>());
}

Ten3 parse_ten3(const json& node, const std::string& where) {
    if (!node.is_array() || node.size() != 3) config_fail(where, "expected a 3x3 array");
    Ten3 m;
    for (int r = 0; r < 3; ++r) {
        if (!node[r].is_array() || node[r].size() != 3)
            config_fail(where, "expected a 3x3 array");
        for (int c = 0; c < 3; ++c) m(r, c) = node[r][c].get<double>();
    }
    return m;
}

Metric3 parse_metric(const json& cfg, const std::string& where) {
    if (!cfg.contains("metric")) return Metric3::identity();
    try {
        return Metric3(parse_ten3(cfg.at("metric"), where + "/metric"));
    } catch (const MetricError& e) {
        config_fail(where + "/metric", e.what());
    }
}

TimeFunction parse_timefunction(const json& node, const std::string& where) {
    const std::string type = need(node, "type", where).get<std::string>();
    if (type == "poly") {
        const json& coeffs = need(node, "coeffs", where);
        if (!coeffs.is_array()) config_fail(where + "/coeffs", "expected an array");
        std::vector<double> c;
        for (const json& v : coeffs) c.push_back(v.get<double>());
        return TimeFunction::polynomial(std::move(c));
    }
    if (type == "sin")
        return TimeFunction::sinusoid(need_number(node, "amplitude", where),
                                      need_number(node, "omega", where),
                                      node.value("phase", 0.0), node.value("offset", 0.0));
    if (type == "exp")
        return TimeFunction::exponential(need_number(node, "amplitude", where),
                                         need_number(node, "rate", where));
    config_fail(where + "/type", "unknown time function '" + type + "'");
}

MotionSpec parse_motion(const json& node, double t0, double t1, const std::string& where) {
    const std::string kind = need(node, "kind", where).get<std::string>();
    if (kind == "identity") return MotionSpec::identity(t0, t1);
    if (kind == "simple-shear")
        return MotionSpec::simple_shear(parse_timefunction(need(node, "gamma", where), where + "/gamma"),
                                        t0, t1);
    if (kind == "uniaxial")
        return MotionSpec::uniaxial(parse_timefunction(need(node, "stretch", where), where + "/stretch"),
                                    t0, t1);
    if (kind == "rigid-rotation")
        return MotionSpec::rigid_rotation(
            parse_vec3(need(node, "axis", where), where + "/axis"),
            parse_timefunction(need(node, "angle", where), where + "/angle"), t0, t1);
    if (kind == "radial")
        return MotionSpec::radial(parse_timefunction(need(node, "scale", where), where + "/scale"),
                                  t0, t1);
    if (kind == "constant-velocity-gradient")
        return MotionSpec::constant_velocity_gradient(parse_ten3(need(node, "L", where), where + "/L"),
                                                      t0, t1);
    if (kind == "homogeneous-linear") {
        const json& kk = need(node, "K", where);
        if (!kk.is_array() || kk.size() != 3) config_fail(where + "/K", "expected 3x3 descriptors");
        std::array<std::array<TimeFunction, 3>, 3> K;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                K[r][c] = parse_timefunction(kk[r][c], where + "/K");
        std::array<TimeFunction, 3> cvec;
        if (node.contains("c")) {
            const json& cc = node.at("c");
            for (int r = 0; r < 3; ++r) cvec[r] = parse_timefunction(cc[r], where + "/c");
        }
        return MotionSpec::homogeneous_linear(K, cvec, t0, t1);
    }
    if (kind == "composition")
        return MotionSpec::composition(
            parse_motion(need(node, "second", where), t0, t1, where + "/second"),
            parse_motion(need(node, "first", where), t0, t1, where + "/first"));
    if (kind == "superpose-rigid") {
        const MotionSpec base = parse_motion(need(node, "base", where), t0, t1, where + "/base");
        const Ten3 q0 = node.contains("q0") ? parse_ten3(node.at("q0"), where + "/q0")
                                            : Ten3(Ten3::Identity());
        std::array<TimeFunction, 3> translation;
        if (node.contains("translation"))
            for (int r = 0; r < 3; ++r)
                translation[r] = parse_timefunction(node.at("translation")[r], where + "/translation");
        return base.superpose_rigid(
            q0, parse_vec3(need(node, "axis", where), where + "/axis"),
            parse_timefunction(need(node, "angle", where), where + "/angle"),
            node.contains("origin") ? parse_vec3(node.at("origin"), where + "/origin")
                                    : Vec3(Vec3::Zero()),
            translation);
    }
    if (kind == "boost")
        return parse_motion(need(node, "base", where), t0, t1, where + "/base")
            .galilean_boost(parse_vec3(need(node, "velocity", where), where + "/velocity"));
    config_fail(where + "/kind", "unknown motion kind '" + kind + "'");
}

PolyVec3 parse_poly(const json& node, const std::string& where) {
    PolyVec3 p;
    const std::string base = node.value("base", "identity");
    if (base == "identity") p = PolyVec3::identity();
    else if (base != "zero") config_fail(where + "/base", "expected 'identity' or 'zero'");
    if (node.contains("components")) {
        const json& comps = node.at("components");
        if (!comps.is_array() || comps.size() != 3)
            config_fail(where + "/components", "expected 3 component term lists");
        for (int c = 0; c < 3; ++c) {
            std::vector<Monomial> terms;
            for (const json& term : comps[c]) {
                Monomial m;
                m.coeff = need_number(term, "c", where + "/components");
                const json& pw = need(term, "p", where + "/components");
                m.px = pw[0].get<int>();
                m.py = pw[1].get<int>();
                m.pz = pw[2].get<int>();
                terms.push_back(m);
            }
            p.component(c) = p.component(c) + PolyScalar(terms);
        }
    }
    return p;
}

Grid3 parse_grid(const json& node, const std::string& where) {
    const Vec3 origin = node.contains("origin") ? parse_vec3(node.at("origin"), where + "/origin")
                                                : Vec3(Vec3::Zero());
    const json& counts_j = need(node, "counts", where);
    std::array<int, 3> counts{counts_j[0].get<int>(), counts_j[1].get<int>(),
                              counts_j[2].get<int>()};
    const Boundary boundary =
        node.value("boundary", "one-sided") == "periodic" ? Boundary::periodic
                                                          : Boundary::one_sided;
    try {
        if (node.contains("size")) {
            const Vec3 size = parse_vec3(node.at("size"), where + "/size");
            return Grid3::box(origin, origin + size, counts, boundary);
        }
        if (node.contains("spacing"))
            return Grid3(origin, parse_vec3(node.at("spacing"), where + "/spacing"), counts,
                         boundary);
    } catch (const GridError& e) {
        config_fail(where, e.what());
    }
    config_fail(where, "need either 'size' or 'spacing'");
}

PlasticLaw parse_law(const json& cfg, const std::string& where) {
    if (!cfg.contains("plastic_law")) return PlasticLaw::none();
    const json& node = cfg.at("plastic_law");
    const std::string kind = need(node, "kind", where).get<std::string>();
    if (kind == "none") return PlasticLaw::none();
    if (kind == "prescribed") {
        const std::string mode = node.value("mode", "times-shape");
        const TimeFunction scale =
            node.contains("scale") ? parse_timefunction(node.at("scale"), where + "/scale")
                                   : TimeFunction::constant(1.0);
        if (mode == "times-shape") return PlasticLaw::prescribed_times_shape(scale);
        if (mode == "tensor")
            return PlasticLaw::prescribed_tensor(parse_ten3(need(node, "tensor", where), where + "/tensor"),
                                                 scale);
        config_fail(where + "/mode", "expected 'times-shape' or 'tensor'");
    }
    if (kind == "threshold-deviatoric") {
        try {
            return PlasticLaw::threshold_deviatoric(need_number(node, "yield", where),
                                                    need_number(node, "fluidity", where));
        } catch (const DomainError& e) {
            config_fail(where, e.what());
        }
    }
    config_fail(where + "/kind", "unknown plastic law '" + kind + "'");
}

ElasticPotential parse_material(const json& cfg, const std::string& where) {
    if (!cfg.contains("material")) return ElasticPotential();
    const json& m = cfg.at("material");
    try {
        return ElasticPotential(need_number(m, "lambda", where), need_number(m, "mu", where),
                                m.value("rho_relaxed", 1.0));
    } catch (const DomainError& e) {
        config_fail(where, e.what());
    }
}

ordered_json summary_base(const RunContext& ctx, const std::string& command) {
    ordered_json s;
    s["tool"] = "shapekin";
    s["version"] = kVersion;
    s["command"] = command;
    s["config_hash"] = ctx.config_hash;
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open output file " + path.string());
    os << text;
}

void write_summary(const RunContext& ctx, const fs::path& name, const ordered_json& summary) {
    write_text(ctx.out_dir / name, summary.dump(2) + "\n");
}

// --- evolve ------------------------------------------------------------------

int run_evolve(const json& cfg, const RunContext& ctx) {
    const json& time = need(cfg, "time", "/");
    const double t0 = need_number(time, "t0", "/time");
    const double t1 = need_number(time, "t1", "/time");
    const double dt = need_number(time, "dt", "/time");
    if (!(dt > 0.0)) config_fail("/time/dt", "must be > 0");
    if (!(t1 > t0)) config_fail("/time/t1", "must exceed t0");
    const int output_every = time.value("output_every", 1);
    if (output_every < 1) config_fail("/time/output_every", "must be >= 1");
    const long long nsteps = std::llround((t1 - t0) / dt);
    if (nsteps % output_every != 0)
        config_fail("/time/output_every", "must divide the number of steps");

    const Metric3 h = parse_metric(cfg, "");
    const MotionSpec motion = parse_motion(need(cfg, "motion", "/"), t0, t1, "/motion");
    const ElasticPotential pot = parse_material(cfg, "/material");
    const PlasticLaw law = parse_law(cfg, "/plastic_law");

    std::vector<Vec3> labels;
    if (cfg.contains("points")) {
        if (cfg.at("points").empty()) config_fail("/points", "needs at least one label");
        for (std::size_t i = 0; i < cfg.at("points").size(); ++i)
            labels.push_back(parse_vec3(cfg.at("points")[i], "/points"));
    } else if (cfg.contains("points_random")) {
        const json& pr = cfg.at("points_random");
        const int count = static_cast<int>(need_number(pr, "count", "/points_random"));
        const Vec3 lo = parse_vec3(need(pr, "box_lo", "/points_random"), "/points_random/box_lo");
        const Vec3 hi = parse_vec3(need(pr, "box_hi", "/points_random"), "/points_random/box_hi");
        std::mt19937_64 rng(ctx.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < count; ++i) {
            Vec3 x;
            for (int a = 0; a < 3; ++a) x[a] = lo[a] + (hi[a] - lo[a]) * u(rng);
            labels.push_back(x);
        }
    } else {
        labels.push_back(Vec3::Zero());
    }

    // Initial shape per point.
    std::vector<HSymTensor> shapes;
    const json init = cfg.value("initial_shape", json{{"kind", "identity"}});
    const std::string init_kind = need(init, "kind", "/initial_shape").get<std::string>();
    for (const Vec3& x : labels) {
        if (init_kind == "identity") {
            shapes.emplace_back(Ten3::Identity(), h, false);
        } else if (init_kind == "explicit") {
            try {
                shapes.emplace_back(parse_ten3(need(init, "tensor", "/initial_shape"),
                                               "/initial_shape/tensor"),
                                    h, true);
            } catch (const SymmetryError& e) {
                config_fail("/initial_shape/tensor", e.what());
            }
        } else if (init_kind == "from-potential") {
            const PolyVec3 pot_field =
                parse_poly(need(init, "potential", "/initial_shape"), "/initial_shape/potential");
            const std::string rep = init.value("representation", "potential");
            const Ten3 g = pot_field.jacobian(x);
            if (!(g.determinant() > 0.0))
                config_fail("/initial_shape/potential", "gradient is singular at a sample point");
            if (rep == "potential") {
                shapes.emplace_back(g * h_adjoint(g, h), h, false);
            } else if (rep == "relaxed-placement") {
                const Ten3 gi = g.inverse();
                shapes.emplace_back(gi * h_adjoint(gi, h), h, false);
            } else {
                config_fail("/initial_shape/representation",
                            "expected 'potential' or 'relaxed-placement'");
            }
        } else {
            config_fail("/initial_shape/kind", "unknown kind '" + init_kind + "'");
        }
    }

    const Trajectory traj =
        evolve_elastoplastic(labels, shapes, motion, h, law, pot, t0, t1, dt, output_every);
    const PowerIdentityResult power = power_identity_residual(traj, pot);

    std::ostringstream csv;
    io::write_trajectory_csv(csv, traj, &power);
    const std::string traj_name =
        cfg.contains("output") ? cfg.at("output").value("trajectory", "trajectory.csv")
                               : "trajectory.csv";
    write_text(ctx.out_dir / traj_name, csv.str());

    double max_d = 0.0, final_vol = 1.0;
    bool plastic_active = false;
    for (const ShapeState& st : traj.states)
        for (const PointState& ps : st.points) {
            max_d = std::max(max_d, deformedness(ps.shape).matrix().norm());
            if (ps.metric_change.norm() > 0.0) plastic_active = true;
        }
    final_vol = volume_ratio(traj.states.back().points[0].shape);

    ordered_json summary = summary_base(ctx, "evolve");
    summary["t0"] = t0;
    summary["t1"] = t1;
    summary["dt"] = traj.dt;
    summary["steps"] = nsteps;
    summary["points"] = labels.size();
    summary["max_symmetry_drift"] = traj.max_symmetry_drift;
    summary["max_deformedness_norm"] = max_d;
    summary["elastic_identity"] = max_d < 1e-8 ? "pass" : "fail";
    summary["plastic_active"] = plastic_active;
    summary["final_volume_ratio"] = final_vol;
    summary["max_power_residual_rel"] = power.max_relative;
    const std::string summary_name =
        cfg.contains("output") ? cfg.at("output").value("summary", "summary.json")
                               : "summary.json";
    write_summary(ctx, summary_name, summary);
    if (!ctx.quiet)
        std::cout << "evolve: " << traj.states.size() << " states -> "
                  << (ctx.out_dir / traj_name).string() << "\n";
    return 0;
}

// --- compat / sweep ----------------------------------------------------------

Field build_shape_field(const json& shape, const Grid3& grid, const Metric3& h,
                        const std::string& where) {
    const std::string kind = need(shape, "kind", where).get<std::string>();
    if (kind == "identity")
        return Field::sample_tensor(grid, [](const Vec3&) { return Ten3(Ten3::Identity()); });
    if (kind == "incompatible-quadratic") {
        const double eps = need_number(shape, "epsilon", where);
        return Field::sample_tensor(grid, [eps](const Vec3& x) {
            Ten3 a = Ten3::Identity();
            a(0, 0) += 2.0 * eps * x.y() * x.y();
            return a;
        });
    }
    if (kind == "relaxed-placement" || kind == "potential") {
        const PolyVec3 p = parse_poly(need(shape, "potential", where), where + "/potential");
        const Field samples =
            Field::sample_vector(grid, [&](const Vec3& x) { return p.value(x); });
        return kind == "potential" ? shape_from_potential(samples, h)
                                   : shape_from_relaxed_placement(samples, h);
    }
    config_fail(where + "/kind", "unknown shape kind '" + kind + "'");
}

int run_compat(const json& cfg, const RunContext& ctx, bool sweep_mode) {
    const Metric3 h = parse_metric(cfg, "");
    Grid3 grid = parse_grid(need(cfg, "grid", "/"), "/grid");
    const json& shape = need(cfg, "shape", "/");

    int levels = 1;
    if (sweep_mode) {
        levels = cfg.contains("sweep") ? cfg.at("sweep").value("levels", 3) : 3;
        if (levels < 2) config_fail("/sweep/levels", "must be >= 2");
    }

    ordered_json summary = summary_base(ctx, sweep_mode ? "sweep" : "compat");
    ordered_json table = ordered_json::array();
    CompatReport last;
    for (int l = 0; l < levels; ++l) {
        const Field afield = build_shape_field(shape, grid, h, "/shape");
        last = compat_residual_from_shape(afield, h);
        ordered_json row;
        row["spacing"] = grid.spacing.maxCoeff();
        row["counts"] = {grid.counts[0], grid.counts[1], grid.counts[2]};
        row["ricci_rms"] = last.ricci_rms;
        row["saint_venant_rms"] = last.saint_venant_rms;
        table.push_back(row);
        if (l + 1 < levels) grid = grid.refine(2);
    }

    std::ostringstream csv;
    io::write_field_csv(csv, last.ricci_field, io::tensor_comp_names("R"));
    const std::string field_name = cfg.contains("output")
                                       ? cfg.at("output").value("field", "ricci_field.csv")
                                       : "ricci_field.csv";
    write_text(ctx.out_dir / field_name, csv.str());

    summary["ricci_rms"] = last.ricci_rms;
    summary["saint_venant_rms"] = last.saint_venant_rms;
    if (sweep_mode) {
        summary["refinement"] = table;
        ordered_json orders = ordered_json::array();
        for (std::size_t l = 0; l + 1 < table.size(); ++l) {
            const double r0 = table[l]["ricci_rms"], r1 = table[l + 1]["ricci_rms"];
            orders.push_back(r1 > 0.0 ? std::log2(r0 / r1) : 0.0);
        }
        summary["observed_orders"] = orders;
    }
    const std::string summary_name =
        cfg.contains("output") ? cfg.at("output").value("summary", "summary.json")
                               : "summary.json";
    write_summary(ctx, summary_name, summary);
    if (!ctx.quiet)
        std::cout << (sweep_mode ? "sweep" : "compat") << ": ricci_rms " << last.ricci_rms
                  << " -> " << (ctx.out_dir / summary_name).string() << "\n";
    return 0;
}

// --- reconstruct ---------------------------------------------------------------

int run_reconstruct(const json& cfg, const RunContext& ctx) {
    const json& strain = need(cfg, "strain_field", "/");
    Field e;
    if (strain.is_string()) {
        const fs::path path = ctx.config_dir / strain.get<std::string>();
        std::ifstream is(path, std::ios::binary);
        if (!is) config_fail("/strain_field", "cannot open " + path.string());
        try {
            e = io::read_field_csv(is);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& err) {
            config_fail("/strain_field", std::string("malformed field dump: ") + err.what());
        }
    } else {
        const Grid3 grid = parse_grid(need(strain, "grid", "/strain_field"), "/strain_field/grid");
        const PolyVec3 w =
            parse_poly(need(strain, "displacement", "/strain_field"), "/strain_field/displacement");
        e = Field::sample_tensor(grid, [&](const Vec3& x) {
            const Ten3 gw = w.jacobian(x);
            return Ten3(0.5 * (gw + gw.transpose()));
        });
    }

    Vec3 u_arb = Vec3::Zero();
    Ten3 omega = Ten3::Zero();
    if (cfg.contains("gauge")) {
        const json& g = cfg.at("gauge");
        if (g.contains("u")) u_arb = parse_vec3(g.at("u"), "/gauge/u");
        if (g.contains("omega")) {
            omega = parse_ten3(g.at("omega"), "/gauge/omega");
            if ((omega + omega.transpose()).norm() > 1e-12 * std::max(omega.norm(), 1.0))
                config_fail("/gauge/omega", "must be antisymmetric");
        }
    }
    const Vec3 base = cfg.contains("base_point")
                          ? parse_vec3(cfg.at("base_point"), "/base_point")
                          : Vec3(e.grid().origin);

    CesaroOptions opts;
    if (cfg.value("order", "xyz") == "zyx") opts.order = StaircaseOrder::zyx;
    if (cfg.contains("threshold")) {
        opts.rel_threshold = cfg.at("threshold").value("relative", opts.rel_threshold);
        opts.enforce = cfg.at("threshold").value("enforce", true);
    }

    const Field u = cesaro_volterra(e, base, u_arb, omega, opts);

    // Verification: rms and max of (u (x) nabla)^S - E over all nodes.
    const Field gu = grad(u);
    double acc = 0.0, worst = 0.0;
    std::int64_t n = 0;
    const auto [nx, ny, nz] = e.grid().counts;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const Ten3 s = 0.5 * (gu.tensor_at(i, j, k) + gu.tensor_at(i, j, k).transpose());
                const double gap = (s - e.tensor_at(i, j, k)).norm();
                acc += gap * gap;
                worst = std::max(worst, gap);
                ++n;
            }

    std::ostringstream csv;
    io::write_field_csv(csv, u, io::vector_comp_names("u"));
    const std::string field_name =
        cfg.contains("output") ? cfg.at("output").value("field", "u_field.csv") : "u_field.csv";
    write_text(ctx.out_dir / field_name, csv.str());

    ordered_json summary = summary_base(ctx, "reconstruct");
    summary["strain_rms"] = interior_rms(e, 0);
    summary["verification_rms"] = std::sqrt(acc / static_cast<double>(n));
    summary["verification_max"] = worst;
    const std::string summary_name =
        cfg.contains("output") ? cfg.at("output").value("summary", "summary.json")
                               : "summary.json";
    write_summary(ctx, summary_name, summary);
    if (!ctx.quiet)
        std::cout << "reconstruct: verification_rms " << std::sqrt(acc / static_cast<double>(n))
                  << " -> " << (ctx.out_dir / field_name).string() << "\n";
    return 0;
}

int dispatch(const std::string& command, const RunContext& ctx) {
    std::ifstream is(ctx.config_path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config file " + ctx.config_path.string());
    std::stringstream buffer;
    buffer << is.rdbuf();
    const std::string bytes = buffer.str();

    json cfg;
    try {
        cfg = json::parse(bytes);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (cfg.contains("command") && cfg.at("command").get<std::string>() != command)
        config_fail("/command", "config declares '" + cfg.at("command").get<std::string>() +
                                    "' but subcommand is '" + command + "'");

    RunContext run = ctx;
    run.config_hash = io::hex64(io::fnv1a(bytes));

    if (command == "evolve") return run_evolve(cfg, run);
    if (command == "compat") return run_compat(cfg, run, false);
    if (command == "sweep") return run_compat(cfg, run, true);
    return run_reconstruct(cfg, run);
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"shapekin scenario runner"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir = ".";
    unsigned seed = 0;
    bool quiet = false;

    for (const char* name : {"evolve", "compat", "reconstruct", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "scenario config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed for randomized scenarios");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    RunContext ctx;
    ctx.config_path = config;
    ctx.config_dir = ctx.config_path.parent_path();
    ctx.out_dir = out_dir;
    ctx.seed = seed;
    ctx.quiet = quiet;

    try {
        std::filesystem::create_directories(ctx.out_dir);
        return dispatch(app.get_subcommands().front()->get_name(), ctx);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IncompatibleFieldError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
