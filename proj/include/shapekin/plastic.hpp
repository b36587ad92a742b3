#pragma once

// Time-dependent relaxed metric: the metric change tensor W, elastoplastic
// evolution Adot = L A + A L+ - W coupled with the relaxed-metric rate
// gtildedot = gtilde J^-1 W h^-1 J^-T gtilde, Ricci-flatness monitoring of
// relaxed-metric snapshots, and the small-elastic-deformedness additive
// decomposition.
//
// Built-in stress-driven law (threshold-deviatoric): with sigma from the
// elastic potential and n = dev(sigma)/|dev(sigma)|_h,
//   W = fluidity * max(0, |dev sigma|_h - yield) * (n A + A n)/2.
// The Jordan product with A keeps W h-symmetric and makes tr(A^-1 W) vanish
// identically, so the law produces no volumetric plastic flow. The slot of A
// in W is a modelling choice isolated here; swap the law to change it.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "shapekin/compat.hpp"
#include "shapekin/grid.hpp"
#include "shapekin/shape.hpp"

namespace shapekin {

struct PlasticLaw {
    enum class Kind { none, prescribed, threshold_deviatoric };

    Kind kind = Kind::none;
    TimeFunction scale;               // prescribed: time coefficient c(t)
    bool times_shape = true;          // prescribed: W = c(t) A (else c(t) W0)
    Ten3 tensor = Ten3::Zero();       // prescribed constant part W0
    double yield = 0.0;               // threshold law
    double fluidity = 0.0;            // threshold law

    static PlasticLaw none() { return {}; }

    static PlasticLaw prescribed_times_shape(const TimeFunction& c) {
        PlasticLaw law;
        law.kind = Kind::prescribed;
        law.scale = c;
        law.times_shape = true;
        return law;
    }

    static PlasticLaw prescribed_tensor(const Ten3& w0,
                                        const TimeFunction& c = TimeFunction::constant(1.0)) {
        PlasticLaw law;
        law.kind = Kind::prescribed;
        law.scale = c;
        law.times_shape = false;
        law.tensor = w0;
        return law;
    }

    static PlasticLaw threshold_deviatoric(double yield, double fluidity) {
        if (yield < 0.0 || fluidity < 0.0)
            throw DomainError("threshold law needs yield >= 0 and fluidity >= 0");
        PlasticLaw law;
        law.kind = Kind::threshold_deviatoric;
        law.yield = yield;
        law.fluidity = fluidity;
        return law;
    }
};

// Metric change tensor W = J gtilde^-1 gtildedot gtilde^-1 J^T h, together
// with the agreement of the equivalent route -J d(gtilde^-1) J^T h.
struct MetricChange {
    Ten3 W = Ten3::Zero();
    double route_agreement = 0.0;  // relative gap between the two expressions
};

inline MetricChange metric_change_from_gdot(const Ten3& J, const Metric3& gtilde,
                                            const Ten3& gtilde_dot, const Metric3& h) {
    if (!(J.determinant() > 0.0))
        throw SingularCompressionError("metric change needs det J > 0");
    if ((gtilde_dot - gtilde_dot.transpose()).norm() >
        kAlgebraicTol * std::max(gtilde_dot.norm(), 1.0))
        throw MetricError("metric rate must be symmetric");
    const Ten3& gi = gtilde.inverse();
    MetricChange out;
    out.W = J * gi * gtilde_dot * gi * J.transpose() * h.matrix();
    const Ten3 ginv_dot = -gi * gtilde_dot * gi;
    const Ten3 route2 = -J * ginv_dot * J.transpose() * h.matrix();
    out.route_agreement = rel_diff(out.W, route2);
    return out;
}

// Turn a plastic law into the per-stage closure used by the RK4 driver.
inline MetricChangeLaw make_metric_change_law(const PlasticLaw& law, const ElasticPotential& pot) {
    switch (law.kind) {
        case PlasticLaw::Kind::none:
            return {};
        case PlasticLaw::Kind::prescribed:
            if (law.times_shape)
                return [c = law.scale](double t, const Ten3& A, const Ten3&, const Metric3&) {
                    return Ten3(c.value(t) * A);
                };
            return [c = law.scale, w0 = law.tensor](double t, const Ten3&, const Ten3&,
                                                    const Metric3&) {
                return Ten3(c.value(t) * w0);
            };
        case PlasticLaw::Kind::threshold_deviatoric:
        default:
            return [law, pot](double t, const Ten3& A, const Ten3&, const Metric3& h) {
                (void)t;
                const HSymTensor shape(A, h, false);
                const HSymTensor d = deformedness(shape);
                const Ten3 sigma = stress_from_potential(d, pot, shape).matrix();
                const Ten3 dev = sigma - (sigma.trace() / 3.0) * Ten3::Identity();
                const double mag = std::sqrt(std::max((dev * dev).trace(), 0.0));
                const double overshoot = mag - law.yield;
                if (!(overshoot > 0.0) || mag == 0.0) return Ten3(Ten3::Zero());
                const Ten3 n = dev / mag;
                return Ten3(law.fluidity * overshoot * 0.5 * (n * A + A * n));
            };
    }
}

// Elastoplastic evolution. A null-kind law reproduces evolve_shape bit for
// bit; otherwise A and gtilde are co-evolved by the same RK4 stages.
inline Trajectory evolve_elastoplastic(const std::vector<Vec3>& labels,
                                       const std::vector<HSymTensor>& initial_shapes,
                                       const MotionSpec& motion, const Metric3& h,
                                       const PlasticLaw& law, const ElasticPotential& pot,
                                       double t0, double t1, double dt, int record_stride = 1) {
    const MetricChangeLaw closure = make_metric_change_law(law, pot);
    return detail::evolve_points(labels, initial_shapes, motion, h, t0, t1, dt,
                                 closure ? &closure : nullptr, record_stride);
}

inline Trajectory evolve_elastoplastic(const HSymTensor& initial_shape, const MotionSpec& motion,
                                       const Metric3& h, const PlasticLaw& law,
                                       const ElasticPotential& pot, double t0, double t1,
                                       double dt, int record_stride = 1) {
    return evolve_elastoplastic({Vec3::Zero()}, {initial_shape}, motion, h, law, pot, t0, t1, dt,
                                record_stride);
}

// Integrate gtildedot = gtilde J^-1 W h^-1 J^-T gtilde from sampled series.
// w_series and j_series must be sampled at half-step resolution: entries
// 2s, 2s+1, 2s+2 serve the RK4 stages of step s, so for N steps of size dt
// the series carry 2N+1 entries spaced dt/2 apart.
inline std::vector<Metric3> evolve_relaxed_metric(const Metric3& gtilde0,
                                                  const std::vector<Ten3>& w_series,
                                                  const std::vector<Ten3>& j_series,
                                                  const Metric3& h, double dt) {
    if (!(dt > 0.0)) throw DomainError("evolution needs dt > 0");
    if (w_series.size() != j_series.size() || w_series.size() < 3 || w_series.size() % 2 == 0)
        throw DomainError("series must hold 2N+1 half-step samples");

    const std::size_t nsteps = (w_series.size() - 1) / 2;
    std::vector<Metric3> out;
    out.reserve(nsteps + 1);
    out.push_back(gtilde0);

    Ten3 g = gtilde0.matrix();
    const auto rate = [&](const Ten3& gcur, std::size_t sample) {
        const Ten3 jinv = j_series[sample].inverse();
        return Ten3(gcur * jinv * w_series[sample] * h.inverse() * jinv.transpose() * gcur);
    };
    for (std::size_t s = 0; s < nsteps; ++s) {
        const Ten3 k1 = rate(g, 2 * s);
        const Ten3 k2 = rate(g + 0.5 * dt * k1, 2 * s + 1);
        const Ten3 k3 = rate(g + 0.5 * dt * k2, 2 * s + 1);
        const Ten3 k4 = rate(g + dt * k3, 2 * s + 2);
        g += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        g = 0.5 * (g + g.transpose());
        Eigen::LLT<Ten3> llt(g);
        if (llt.info() != Eigen::Success)
            throw MetricError("relaxed metric lost positivity during evolution");
        out.push_back(Metric3(g));
    }
    return out;
}

struct RicciDriftReport {
    std::vector<double> rms_series;  // Ricci rms per snapshot
    double max_drift = 0.0;
};

// Ricci rms of relaxed-metric field snapshots; flat stays at zero.
inline RicciDriftReport ricci_flatness_monitor(const std::vector<Field>& gtilde_series) {
    RicciDriftReport rep;
    for (const Field& g : gtilde_series) {
        if (g.comps() != 9) throw MetricError("relaxed metric snapshots must be rank 2");
        const double rms = ricci(g).rms;
        rep.rms_series.push_back(rms);
        rep.max_drift = std::max(rep.max_drift, rms);
    }
    return rep;
}

// Terms of the additive small-deformedness split between two recorded states:
// sym_h((J2 - J1) J1^-1) ~ Delta D + plastic_term, with
// plastic_term = -(1/2) J1 (gtilde2^-1 - gtilde1^-1) J1^T h.
struct SmallDeformednessSplit {
    Ten3 lhs = Ten3::Zero();
    Ten3 delta_deformedness = Ten3::Zero();
    Ten3 plastic_term = Ten3::Zero();
    double residual = 0.0;  // |lhs - (delta_deformedness + plastic_term)|
};

inline SmallDeformednessSplit small_deformedness_decomposition(const Trajectory& traj, double t1,
                                                               double t2, std::size_t point = 0) {
    const auto locate = [&](double t) -> const ShapeState& {
        const ShapeState* best = nullptr;
        double gap = 1e300;
        for (const ShapeState& st : traj.states) {
            const double d = std::abs(st.time - t);
            if (d < gap) {
                gap = d;
                best = &st;
            }
        }
        if (!best || gap > 0.51 * traj.dt + 1e-12)
            throw DomainError("requested time not recorded in the trajectory");
        return *best;
    };
    const ShapeState& s1 = locate(t1);
    const ShapeState& s2 = locate(t2);
    if (!(s2.time > s1.time)) throw DomainError("decomposition needs t2 > t1");

    const Ten3& j1 = s1.points.at(point).jacobian;
    const Ten3 j1_inv = j1.inverse();
    for (const ShapeState& st : traj.states) {
        if (st.time < s1.time || st.time > s2.time) continue;
        if ((st.points.at(point).jacobian * j1_inv - Ten3::Identity()).norm() >= 0.1)
            throw RegimeError("placement gradient changes too much over the interval");
    }

    const Metric3& h = traj.metric;
    SmallDeformednessSplit out;
    const Ten3& j2 = s2.points.at(point).jacobian;
    out.lhs = sym_part_h((j2 - j1) * j1_inv, h).matrix();
    out.delta_deformedness = deformedness(s2.points.at(point).shape).matrix() -
                             deformedness(s1.points.at(point).shape).matrix();
    const Ten3 dginv = s2.points.at(point).relaxed_metric.inverse() -
                       s1.points.at(point).relaxed_metric.inverse();
    out.plastic_term = -0.5 * j1 * dginv * j1.transpose() * h.matrix();
    out.residual = (out.lhs - (out.delta_deformedness + out.plastic_term)).norm();
    return out;
}

}  // namespace shapekin
