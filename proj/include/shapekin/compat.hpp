#pragma once

// Curvature-based compatibility of the relaxed metric: Christoffel and Ricci
// tensors of a metric field on a grid, the finite-deformation compatibility
// residual of a shape field, vector potentials of shape, gauge transforms of
// the auxiliary relaxed embedding, and Cesaro-Volterra reconstruction.
//
// The compatibility condition is evaluated as Ricci-flatness of g = h A^-1.
// The derivative entering the Christoffel/Ricci formulas is the flat affine
// derivative of the ambient box, so plain finite differences apply.
//
// Two potential representations are provided:
//  - shape_from_potential: A = (q (x) nabla)(q (x) nabla)^+ for a sampled
//    potential field q, the map that carries relaxed-chart points to current
//    positions. The output field is indexed by the potential's own chart.
//  - shape_from_relaxed_placement: A = (r (x) nabla)^-1 [(r (x) nabla)^-1]^+
//    for the relaxed-placement field r sampled over the analysis chart. Then
//    g = h A^-1 = (r (x) nabla)^T h (r (x) nabla) is a pullback of h, so the
//    produced shape field is exactly compatible on its own grid; this is the
//    form the flatness and gauge studies use.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapekin/grid.hpp"
#include "shapekin/poly.hpp"
#include "shapekin/motion.hpp"
#include "shapekin/tensor.hpp"

namespace shapekin {

struct CompatReport {
    Field ricci_field;                                   // rank 2
    double ricci_rms = 0.0;                              // interior margin 2
    double saint_venant_rms = 0.0;                       // of the linearized strain
    Grid3 grid;
    std::vector<std::pair<double, double>> convergence;  // (spacing, ricci_rms)
};

// Gauge freedom of the relaxed embedding: an h-isometry of space,
// r' = R (r - center) + center + translation.
struct PseudoMotionGauge {
    Ten3 rotation = Ten3::Identity();
    Vec3 center = Vec3::Zero();
    Vec3 translation = Vec3::Zero();
};

inline void require_h_orthogonal(const Ten3& R, const Metric3& h) {
    if ((R.transpose() * h.matrix() * R - h.matrix()).norm() > 1e-10 * h.matrix().norm())
        throw FrameError("gauge rotation is not h-orthogonal");
}

// Christoffel symbols (second kind) of a metric field:
// Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk), stored [(i*3+j)*3+k].
inline Field christoffel(const Field& gfield) {
    if (gfield.comps() != 9) throw GridError("christoffel expects a rank-2 metric field");
    Field out = Field::tensor3(gfield.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        const Ten3 g = gfield.tensor_at(i, j, k);
        Eigen::LLT<Ten3> llt(g);
        if (llt.info() != Eigen::Success)
            throw MetricError("metric field not SPD at node (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + ")");
        const Ten3 ginv = g.inverse();
        double dg[3][3][3];  // dg[a][l][m] = d_a g_lm
        for (int a = 0; a < 3; ++a)
            for (int l = 0; l < 3; ++l)
                for (int m = 0; m < 3; ++m)
                    dg[a][l][m] = fd::deriv_at(gfield, l * 3 + m, a, i, j, k);
        for (int ii = 0; ii < 3; ++ii)
            for (int jj = 0; jj < 3; ++jj)
                for (int kk = 0; kk < 3; ++kk) {
                    double acc = 0.0;
                    for (int l = 0; l < 3; ++l)
                        acc += ginv(ii, l) * (dg[jj][l][kk] + dg[kk][l][jj] - dg[l][jj][kk]);
                    o.at(i, j, k, (ii * 3 + jj) * 3 + kk) = 0.5 * acc;
                }
    });
    return out;
}

struct RicciResult {
    Field ricci;       // rank 2
    double rms = 0.0;  // interior margin 2
};

// Ricci tensor of a metric field on the flat ambient box:
// R_jk = d_i Gamma^i_jk - d_k Gamma^i_ji + Gamma^i_ip Gamma^p_jk
//        - Gamma^i_kp Gamma^p_ji.
inline RicciResult ricci(const Field& gfield) {
    const Field gamma = christoffel(gfield);
    Field r = Field::tensor(gfield.grid());
    r.fill([&](int i, int j, int k, Field& o) {
        double tr13[3];  // Gamma^i_pi as a function of p
        for (int p = 0; p < 3; ++p) {
            tr13[p] = 0.0;
            for (int ii = 0; ii < 3; ++ii) tr13[p] += gamma.at(i, j, k, (ii * 3 + p) * 3 + ii);
        }
        for (int jj = 0; jj < 3; ++jj)
            for (int kk = 0; kk < 3; ++kk) {
                double val = 0.0;
                for (int ii = 0; ii < 3; ++ii) {
                    val += fd::deriv_at(gamma, (ii * 3 + jj) * 3 + kk, ii, i, j, k);
                    val -= fd::deriv_at(gamma, (ii * 3 + jj) * 3 + ii, kk, i, j, k);
                }
                for (int p = 0; p < 3; ++p) {
                    val += tr13[p] * gamma.at(i, j, k, (p * 3 + jj) * 3 + kk);
                    for (int ii = 0; ii < 3; ++ii)
                        val -= gamma.at(i, j, k, (ii * 3 + kk) * 3 + p) *
                               gamma.at(i, j, k, (p * 3 + jj) * 3 + ii);
                }
                o.at(i, j, k, jj * 3 + kk) = val;
            }
    });
    RicciResult out;
    out.rms = interior_rms(r, kSecondDerivMargin);
    out.ricci = std::move(r);
    return out;
}

// Ricci-flatness residual of g = h A^-1 plus the Saint-Venant residual of the
// linearized strain (h A - h)/2 (symmetric for any h-symmetric A; equals
// (A - I)/2 for Euclidean h).
inline CompatReport compat_residual_from_shape(const Field& afield, const Metric3& h) {
    if (afield.comps() != 9) throw GridError("shape field must be rank 2");
    const Grid3& grid = afield.grid();
    Field gfield = Field::tensor(grid);
    Field strain = Field::tensor(grid);
    gfield.fill([&](int i, int j, int k, Field& o) {
        const Ten3 a = afield.tensor_at(i, j, k);
        const Ten3 ha = h.matrix() * a;
        if ((ha - ha.transpose()).norm() > 1e-9 * std::max(ha.norm(), 1.0))
            throw SymmetryError("shape field not h-symmetric at node (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ")");
        Eigen::LLT<Ten3> llt(0.5 * (ha + ha.transpose()));
        if (llt.info() != Eigen::Success)
            throw NonPositiveShapeError("shape field not SPD at node (" + std::to_string(i) + "," +
                                        std::to_string(j) + "," + std::to_string(k) + ")");
        const Ten3 g = h.matrix() * a.inverse();
        o.set_tensor(i, j, k, 0.5 * (g + g.transpose()));
        strain.set_tensor(i, j, k, 0.5 * (ha - h.matrix()));
    });

    RicciResult rr = ricci(gfield);
    CompatReport report;
    report.grid = grid;
    report.ricci_rms = rr.rms;
    report.ricci_field = std::move(rr.ricci);
    report.saint_venant_rms = saint_venant_residual(strain).rms;
    return report;
}

// A = (q (x) nabla)(q (x) nabla)^+ from a sampled potential field.
inline Field shape_from_potential(const Field& qhat, const Metric3& h) {
    if (qhat.comps() != 3) throw GridError("potential must be a vector field");
    const Field gq = grad(qhat);
    Field out = Field::tensor(qhat.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        const Ten3 g = gq.tensor_at(i, j, k);
        if (!(g.determinant() > 0.0))
            throw SingularCompressionError("potential gradient singular at node (" +
                                           std::to_string(i) + "," + std::to_string(j) + "," +
                                           std::to_string(k) + ")");
        o.set_tensor(i, j, k, g * h_adjoint(g, h));
    });
    return out;
}

// A = M^-1 (M^-1)^+ with M the gradient of the relaxed-placement field; the
// associated metric h A^-1 = M^T h M is a pullback of h and hence flat.
inline Field shape_from_relaxed_placement(const Field& rhat, const Metric3& h) {
    if (rhat.comps() != 3) throw GridError("relaxed placement must be a vector field");
    const Field gr = grad(rhat);
    Field out = Field::tensor(rhat.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        const Ten3 m = gr.tensor_at(i, j, k);
        if (!(m.determinant() > 0.0))
            throw SingularCompressionError("relaxed placement gradient singular at node (" +
                                           std::to_string(i) + "," + std::to_string(j) + "," +
                                           std::to_string(k) + ")");
        const Ten3 minv = m.inverse();
        o.set_tensor(i, j, k, minv * h_adjoint(minv, h));
    });
    return out;
}

// Apply the gauge isometry to the values of a relaxed-placement field. The
// shape field built from it is unchanged node by node.
inline Field pseudo_gauge_transform(const Field& rhat, const PseudoMotionGauge& gauge,
                                    const Metric3& h) {
    if (rhat.comps() != 3) throw GridError("relaxed placement must be a vector field");
    require_h_orthogonal(gauge.rotation, h);
    const bool pure_shift = (gauge.rotation - Ten3::Identity()).norm() == 0.0;
    Field out = Field::vector(rhat.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        const Vec3 v = rhat.vector_at(i, j, k);
        o.set_vector(i, j, k, pure_shift
                                  ? Vec3(v + gauge.translation)
                                  : Vec3(gauge.rotation * (v - gauge.center) + gauge.center +
                                         gauge.translation));
    });
    return out;
}

// Same gauge action on an analytic potential: q' = q after the isometry of its
// chart, q'(z) = q(R^-1 (z - center - translation) + center).
inline PolyVec3 pseudo_gauge_transform(const PolyVec3& qhat, const PseudoMotionGauge& gauge,
                                       const Metric3& h) {
    require_h_orthogonal(gauge.rotation, h);
    const Ten3 rinv = gauge.rotation.inverse();
    return qhat.compose_affine(rinv, rinv * (-gauge.center - gauge.translation) + gauge.center);
}

// --- Cesaro-Volterra reconstruction -----------------------------------------

enum class StaircaseOrder { xyz, zyx };

struct CesaroOptions {
    StaircaseOrder order = StaircaseOrder::xyz;
    // Reject inputs whose Saint-Venant rms exceeds rel_threshold times the
    // field rms. Set enforce=false for deliberate incompatible-input runs.
    double rel_threshold = 1e-6;
    bool enforce = true;
};

namespace detail_cesaro {

// Integrand U_ij(X', X) = E_ij + (X - X')_k (d_k E_ij - d_i E_kj); the step
// contribution is U_ij dX'_j.
inline Ten3 integrand(const Field& e, const Field& ge, int i, int j, int k, const Vec3& target) {
    const Vec3 xp = e.grid().node(i, j, k);
    const Vec3 d = target - xp;
    Ten3 u;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double val = e.at(i, j, k, a * 3 + b);
            for (int c = 0; c < 3; ++c) {
                const double dkeij = ge.at(i, j, k, (a * 3 + b) * 3 + c);
                const double diekj = ge.at(i, j, k, (c * 3 + b) * 3 + a);
                val += d[c] * (dkeij - diekj);
            }
            u(a, b) = val;
        }
    return u;
}

}  // namespace detail_cesaro

// Reconstruct a vector potential u with (u (x) nabla)^S = E by integrating the
// Cesaro-Volterra integrand along axis-aligned staircase paths from the node
// nearest to base_point. The gauge pair (u_arb, Omega_arb) adds the rigid
// field u_arb + Omega_arb (X - X_base).
inline Field cesaro_volterra(const Field& e, const Vec3& base_point, const Vec3& u_arb,
                             const Ten3& omega_arb, const CesaroOptions& opts = {}) {
    if (e.comps() != 9) throw GridError("strain field must be rank 2");
    if ((omega_arb + omega_arb.transpose()).norm() > 1e-12 * std::max(omega_arb.norm(), 1.0))
        throw SymmetryError("gauge tensor must be antisymmetric");
    const Grid3& grid = e.grid();
    if (grid.boundary == Boundary::periodic)
        throw GridError("reconstruction expects a non-periodic box");

    const SaintVenantResult sv = saint_venant_residual(e);  // also validates symmetry
    if (opts.enforce) {
        const double scale = std::max(interior_rms(e, 0), 1e-300);
        if (sv.rms > opts.rel_threshold * scale)
            throw IncompatibleFieldError(
                "strain field fails the compatibility threshold: saint-venant rms " +
                std::to_string(sv.rms) + " vs field rms " + std::to_string(scale));
    }

    // Base node nearest to the requested point.
    int base[3];
    for (int a = 0; a < 3; ++a) {
        const double rel = (base_point[a] - grid.origin[a]) / grid.spacing[a];
        base[a] = std::clamp(static_cast<int>(std::lround(rel)), 0, grid.counts[a] - 1);
    }
    const Vec3 xbase = grid.node(base[0], base[1], base[2]);

    const Field ge = grad(e);
    Field out = Field::vector(grid);

    out.fill([&](int i, int j, int k, Field& o) {
        const Vec3 target = grid.node(i, j, k);
        Vec3 u = u_arb + omega_arb * (target - xbase);

        int pos[3] = {base[0], base[1], base[2]};
        const int goal[3] = {i, j, k};
        const std::array<int, 3> axis_order = opts.order == StaircaseOrder::xyz
                                                  ? std::array<int, 3>{0, 1, 2}
                                                  : std::array<int, 3>{2, 1, 0};
        for (int axis : axis_order) {
            const int dir = goal[axis] >= pos[axis] ? 1 : -1;
            while (pos[axis] != goal[axis]) {
                const int next = pos[axis] + dir;
                const Ten3 u0 = detail_cesaro::integrand(e, ge, pos[0], pos[1], pos[2], target);
                int q[3] = {pos[0], pos[1], pos[2]};
                q[axis] = next;
                const Ten3 u1 = detail_cesaro::integrand(e, ge, q[0], q[1], q[2], target);
                const double step = dir * grid.spacing[axis];
                u += 0.5 * step * (u0.col(axis) + u1.col(axis));
                pos[axis] = next;
            }
        }
        o.set_vector(i, j, k, u);
    });
    return out;
}

// Reconstruction value at the end of an arbitrary polyline (first waypoint is
// the base point). E and its gradient are interpolated trilinearly between
// nodes; waypoints must stay inside the box.
inline Vec3 cesaro_volterra_along(const Field& e, const std::vector<Vec3>& polyline,
                                  const Vec3& u_arb, const Ten3& omega_arb,
                                  int samples_per_segment = 64) {
    if (e.comps() != 9) throw GridError("strain field must be rank 2");
    if (polyline.size() < 2) throw GridError("polyline needs at least two waypoints");
    const Grid3& grid = e.grid();

    const Field ge = grad(e);
    const auto interp = [&](const Field& f, const Vec3& x, int comp) {
        double rel[3];
        int lo[3];
        for (int a = 0; a < 3; ++a) {
            rel[a] = (x[a] - grid.origin[a]) / grid.spacing[a];
            if (rel[a] < -1e-9 || rel[a] > grid.counts[a] - 1 + 1e-9)
                throw GridError("polyline leaves the grid box");
            lo[a] = std::clamp(static_cast<int>(std::floor(rel[a])), 0, grid.counts[a] - 2);
            rel[a] = std::clamp(rel[a] - lo[a], 0.0, 1.0);
        }
        double acc = 0.0;
        for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
                for (int dk = 0; dk < 2; ++dk) {
                    const double w = (di ? rel[0] : 1.0 - rel[0]) * (dj ? rel[1] : 1.0 - rel[1]) *
                                     (dk ? rel[2] : 1.0 - rel[2]);
                    acc += w * f.at(lo[0] + di, lo[1] + dj, lo[2] + dk, comp);
                }
        return acc;
    };

    const Vec3 target = polyline.back();
    const auto integrand_at = [&](const Vec3& xp) {
        const Vec3 d = target - xp;
        Ten3 u;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double val = interp(e, xp, a * 3 + b);
                for (int c = 0; c < 3; ++c)
                    val += d[c] * (interp(ge, xp, (a * 3 + b) * 3 + c) -
                                   interp(ge, xp, (c * 3 + b) * 3 + a));
                u(a, b) = val;
            }
        return u;
    };

    Vec3 u = u_arb + omega_arb * (target - polyline.front());
    for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
        const Vec3 a = polyline[s], b = polyline[s + 1];
        const Vec3 dx = (b - a) / samples_per_segment;
        Ten3 prev = integrand_at(a);
        for (int i = 1; i <= samples_per_segment; ++i) {
            const Ten3 cur = integrand_at(a + i * (b - a) / samples_per_segment);
            u += 0.5 * ((prev + cur) * dx);
            prev = cur;
        }
    }
    return u;
}

// --- Jacobian factorization and convergence helpers -------------------------

struct JacobianFactors {
    Ten3 jacobian;        // J of the true motion
    Ten3 potential_grad;  // q (x) nabla = J Jhat^-1
    Ten3 pseudo_jacobian; // Jhat of the relaxed embedding motion
};

// J = (q (x) nabla) Jhat with both gradients taken against shared labels.
inline JacobianFactors factorize_jacobian(const MotionSpec& motion,
                                          const MotionSpec& pseudo_motion, double t) {
    JacobianFactors f;
    f.jacobian = motion.deformation_gradient(t);
    f.pseudo_jacobian = pseudo_motion.deformation_gradient(t);
    f.potential_grad = f.jacobian * f.pseudo_jacobian.inverse();
    return f;
}

// Ricci residual of the shape field of an analytic relaxed placement over a
// refinement sweep; returns (spacing, rms) pairs with spacing strictly
// decreasing.
inline std::vector<std::pair<double, double>> ricci_convergence_sweep(const PolyVec3& rhat,
                                                                      const Grid3& base,
                                                                      const Metric3& h,
                                                                      int levels) {
    std::vector<std::pair<double, double>> out;
    Grid3 g = base;
    for (int l = 0; l < levels; ++l) {
        const Field rfield =
            Field::sample_vector(g, [&](const Vec3& x) { return rhat.value(x); });
        const Field a = shape_from_relaxed_placement(rfield, h);
        const CompatReport rep = compat_residual_from_shape(a, h);
        out.emplace_back(g.spacing.maxCoeff(), rep.ricci_rms);
        if (l + 1 < levels) g = g.refine(2);
    }
    return out;
}

}  // namespace shapekin
