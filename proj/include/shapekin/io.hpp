#pragma once

// Deterministic file formats shared by the library and the scenario runner.
//
// Field dump (CSV): one meta line, one header line, one row per node in
// i-major order. All floating-point values carry 17 significant digits, so a
// dump is byte-stable across runs.
//
//   # shapekin-field v1 {"boundary":"one-sided","comps":9,...}
//   i,j,k,x,y,z,<component names>
//   0,0,0,0,0,0,...
//
// Trajectory dump (CSV): header
//   t,point_id,A_xx,...,A_zz,D_xx,...,D_zz,vol_ratio,power_residual
// with one row per recorded state and material point.

#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shapekin/grid.hpp"
#include "shapekin/shape.hpp"

namespace shapekin::io {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::vector<std::string> vector_comp_names(const std::string& prefix) {
    return {prefix + "_x", prefix + "_y", prefix + "_z"};
}

inline std::vector<std::string> tensor_comp_names(const std::string& prefix) {
    const char axes[] = {'x', 'y', 'z'};
    std::vector<std::string> names;
    for (char r : axes)
        for (char c : axes) names.push_back(prefix + "_" + r + c);
    return names;
}

inline void write_field_csv(std::ostream& os, const Field& field,
                            const std::vector<std::string>& comp_names) {
    const Grid3& g = field.grid();
    nlohmann::ordered_json meta;
    meta["format"] = "shapekin-field";
    meta["version"] = 1;
    meta["origin"] = {g.origin[0], g.origin[1], g.origin[2]};
    meta["spacing"] = {g.spacing[0], g.spacing[1], g.spacing[2]};
    meta["counts"] = {g.counts[0], g.counts[1], g.counts[2]};
    meta["boundary"] = g.boundary == Boundary::periodic ? "periodic" : "one-sided";
    meta["comps"] = field.comps();
    os << "# shapekin-field v1 " << meta.dump() << "\n";

    os << "i,j,k,x,y,z";
    for (const std::string& n : comp_names) os << "," << n;
    os << "\n";

    for (int i = 0; i < g.counts[0]; ++i)
        for (int j = 0; j < g.counts[1]; ++j)
            for (int k = 0; k < g.counts[2]; ++k) {
                const Vec3 x = g.node(i, j, k);
                os << i << "," << j << "," << k << "," << fmt17(x[0]) << "," << fmt17(x[1]) << ","
                   << fmt17(x[2]);
                for (int c = 0; c < field.comps(); ++c) os << "," << fmt17(field.at(i, j, k, c));
                os << "\n";
            }
}

inline Field read_field_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# shapekin-field v1 ", 0) != 0)
        throw ConfigError("field dump missing the shapekin-field meta line");
    const nlohmann::json meta = nlohmann::json::parse(line.substr(20));

    Grid3 grid(Vec3(meta["origin"][0], meta["origin"][1], meta["origin"][2]),
               Vec3(meta["spacing"][0], meta["spacing"][1], meta["spacing"][2]),
               {meta["counts"][0], meta["counts"][1], meta["counts"][2]},
               meta["boundary"] == "periodic" ? Boundary::periodic : Boundary::one_sided);
    const int comps = meta["comps"];
    Field field(grid, comps);

    if (!std::getline(is, line)) throw ConfigError("field dump missing the header line");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        int idx[3];
        for (int a = 0; a < 3; ++a) {
            if (!std::getline(row, cell, ',')) throw ConfigError("truncated field dump row");
            idx[a] = std::stoi(cell);
        }
        for (int skip = 0; skip < 3; ++skip) std::getline(row, cell, ',');
        for (int c = 0; c < comps; ++c) {
            if (!std::getline(row, cell, ',')) throw ConfigError("truncated field dump row");
            field.at(idx[0], idx[1], idx[2], c) = std::stod(cell);
        }
    }
    return field;
}

// Trajectory rows with the Hencky deformedness and the per-state power
// residual (pass nullptr to emit zeros for the residual column).
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const PowerIdentityResult* power) {
    os << "t,point_id";
    for (const std::string& n : tensor_comp_names("A")) os << "," << n;
    for (const std::string& n : tensor_comp_names("D")) os << "," << n;
    os << ",vol_ratio,power_residual\n";

    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const ShapeState& st = traj.states[s];
        for (std::size_t p = 0; p < st.points.size(); ++p) {
            const PointState& ps = st.points[p];
            os << fmt17(st.time) << "," << p;
            const Ten3& a = ps.shape.matrix();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) os << "," << fmt17(a(r, c));
            const Ten3 d = deformedness(ps.shape).matrix();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) os << "," << fmt17(d(r, c));
            os << "," << fmt17(volume_ratio(ps.shape));
            os << "," << fmt17(power ? power->residuals[s][p] : 0.0);
            os << "\n";
        }
    }
}

}  // namespace shapekin::io
