#pragma once

// Elastic kinematic state variables: the current-metric pullback, the elastic
// shape tensor A = g^-1 h, its comoving evolution Adot = L A + A L+, the
// logarithmic deformedness D = ln sqrt(A), and the quadratic isotropic
// potential with its power identity tr(sigma L) = rho Udot.
//
// Evolution is Lagrangian: each material sample point carries its own state
// and is stepped with classical fixed-step RK4 along the analytic motion. A is
// projected back onto the h-symmetric subspace after every step; the removed
// drift is tracked and reported.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "shapekin/motion.hpp"
#include "shapekin/tensor.hpp"

namespace shapekin {

// Pullback of the spatial metric through a placement gradient: J^T h J.
inline Metric3 current_metric_pullback(const Ten3& J, const Metric3& h) {
    if (!(J.determinant() > 0.0))
        throw SingularCompressionError("metric pullback needs det J > 0");
    return Metric3(J.transpose() * h.matrix() * J);
}

// Elastic shape A = g^-1 h; h-symmetric, SPD, identity iff g = h.
inline HSymTensor shape_from_metrics(const Metric3& g, const Metric3& h) {
    return HSymTensor(g.inverse() * h.matrix(), h, false);
}

// Material form of the shape tensor, Atilde = J^-1 A J, symmetric against the
// pulled-back relaxed metric gtilde = J^T (h A^-1) J.
inline HSymTensor shape_material(const Ten3& J, const HSymTensor& A, const Metric3& h) {
    if (!(J.determinant() > 0.0))
        throw SingularCompressionError("material shape needs det J > 0");
    const Ten3 jinv = J.inverse();
    const Ten3 g_spatial = h.matrix() * A.matrix().inverse();
    const Metric3 gtilde(J.transpose() * g_spatial * J);
    return HSymTensor(jinv * A.matrix() * J, gtilde, false);
}

// Hencky-type deformedness D = (1/2) ln A; tr D = ln sqrt(det A).
inline HSymTensor deformedness(const HSymTensor& A) {
    const HSymTensor lnA = log_hsym(A);
    return HSymTensor(0.5 * lnA.matrix(), A.metric(), false);
}

// Current volume over relaxed volume, sqrt(det A) = exp(tr D).
inline double volume_ratio(const HSymTensor& A) {
    const double det = A.matrix().determinant();
    if (!(det > 0.0)) throw NonPositiveShapeError("volume ratio of a non-positive shape");
    return std::sqrt(det);
}

// Quadratic isotropic potential U(D) = (lambda/2) (tr D)^2 + mu tr(D^2),
// with the density evolved by mass conservation against the volume ratio.
struct ElasticPotential {
    double lambda = 1.0;
    double mu = 1.0;
    double rho_relaxed = 1.0;

    ElasticPotential() = default;
    ElasticPotential(double lambda_, double mu_, double rho_relaxed_ = 1.0)
        : lambda(lambda_), mu(mu_), rho_relaxed(rho_relaxed_) {
        if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
            throw DomainError("elastic potential needs mu > 0 and 3 lambda + 2 mu > 0");
    }

    double energy(const HSymTensor& D) const {
        const double tr = D.matrix().trace();
        return 0.5 * lambda * tr * tr + mu * (D.matrix() * D.matrix()).trace();
    }

    // dU/dD = lambda tr(D) I + 2 mu D
    Ten3 energy_derivative(const HSymTensor& D) const {
        return lambda * D.matrix().trace() * Ten3::Identity() + 2.0 * mu * D.matrix();
    }
};

// sigma = rho dU/dD with rho = rho_relaxed / sqrt(det A).
inline HSymTensor stress_from_potential(const HSymTensor& D, const ElasticPotential& pot,
                                        const HSymTensor& A) {
    const double rho = pot.rho_relaxed / volume_ratio(A);
    return HSymTensor(rho * pot.energy_derivative(D), D.metric(), false);
}

// State of one material sample point at one instant.
struct PointState {
    Vec3 label = Vec3::Zero();
    HSymTensor shape;                      // A
    Ten3 jacobian = Ten3::Identity();      // J relative to the start placement
    Metric3 relaxed_metric;                // gtilde (constant unless plastic)
    Ten3 metric_change = Ten3::Zero();     // W at this instant
};

struct ShapeState {
    double time = 0.0;
    Ten3 velocity_gradient = Ten3::Zero();
    std::vector<PointState> points;
};

struct Trajectory {
    std::vector<ShapeState> states;
    double dt = 0.0;                 // actual step used
    double max_symmetry_drift = 0.0; // largest h-symmetry projection removed
    Metric3 metric;                  // spatial metric h of the run
};

// Optional plastic closure: returns the metric change tensor W for the state
// of one point mid-step. Null means strictly elastic stepping.
using MetricChangeLaw =
    std::function<Ten3(double t, const Ten3& A, const Ten3& J, const Metric3& h)>;

namespace detail {

inline Ten3 shape_rate(const Ten3& A, const Ten3& L, const Ten3& Ladj) {
    return L * A + A * Ladj;
}

// Shared RK4 driver for elastic and elastoplastic runs. The W term and the
// relaxed-metric ODE are skipped entirely when no law is given, so a null law
// reproduces the elastic path bit for bit.
inline Trajectory evolve_points(const std::vector<Vec3>& labels,
                                const std::vector<HSymTensor>& initial_shapes,
                                const MotionSpec& motion, const Metric3& h, double t0, double t1,
                                double dt, const MetricChangeLaw* law, int record_stride) {
    if (!(dt > 0.0)) throw DomainError("evolution needs dt > 0");
    if (!(t1 > t0)) throw DomainError("evolution needs t1 > t0");
    if (labels.size() != initial_shapes.size())
        throw DomainError("one initial shape per material point required");
    if (record_stride < 1) record_stride = 1;

    const long long nsteps = std::max(1LL, std::llround((t1 - t0) / dt));
    const double step = (t1 - t0) / static_cast<double>(nsteps);

    const Ten3 k0_inv = motion.affine(t0).K.inverse();
    const auto jacobian_at = [&](double t) { return Ten3(motion.affine(t).K * k0_inv); };
    const auto l_at = [&](double t) { return motion.velocity_gradient(t); };

    const std::size_t npts = labels.size();
    std::vector<Ten3> A(npts), G(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        const HSymTensor& a0 = initial_shapes[p];
        if (!a0.is_spd()) throw NonPositiveShapeError("initial shape must be SPD");
        A[p] = a0.matrix();
        G[p] = h.matrix() * a0.matrix().inverse();  // gtilde at t0 (J = I there)
    }

    Trajectory traj;
    traj.dt = step;
    traj.metric = h;

    const auto record = [&](double t) {
        ShapeState st;
        st.time = t;
        st.velocity_gradient = l_at(t);
        const Ten3 j = jacobian_at(t);
        st.points.resize(npts);
        for (std::size_t p = 0; p < npts; ++p) {
            PointState& ps = st.points[p];
            ps.label = labels[p];
            ps.shape = HSymTensor(A[p], h, false);
            ps.jacobian = j;
            ps.relaxed_metric = Metric3(0.5 * (G[p] + G[p].transpose()));
            ps.metric_change =
                law ? (*law)(t, A[p], j, h) : Ten3::Zero();
        }
        traj.states.push_back(std::move(st));
        return true;
    };

    record(t0);

    for (long long s = 0; s < nsteps; ++s) {
        const double t = t0 + step * static_cast<double>(s);

        struct Stage {
            double t;
            Ten3 L, Ladj, J;
        };
        const auto make_stage = [&](double ts) {
            Stage sg;
            sg.t = ts;
            sg.L = l_at(ts);
            sg.Ladj = h_adjoint(sg.L, h);
            sg.J = jacobian_at(ts);
            return sg;
        };
        const Stage s1 = make_stage(t);
        const Stage s2 = make_stage(t + 0.5 * step);
        const Stage s4 = make_stage(t + step);

        for (std::size_t p = 0; p < npts; ++p) {
            if (law) {
                const auto rate = [&](const Stage& sg, const Ten3& a, const Ten3& g,
                                      Ten3& da, Ten3& dg) {
                    const Ten3 w = (*law)(sg.t, a, sg.J, h);
                    da = shape_rate(a, sg.L, sg.Ladj) - w;
                    const Ten3 jinv = sg.J.inverse();
                    dg = g * jinv * w * h.inverse() * jinv.transpose() * g;
                };
                Ten3 ka1, kg1, ka2, kg2, ka3, kg3, ka4, kg4;
                rate(s1, A[p], G[p], ka1, kg1);
                rate(s2, A[p] + 0.5 * step * ka1, G[p] + 0.5 * step * kg1, ka2, kg2);
                rate(s2, A[p] + 0.5 * step * ka2, G[p] + 0.5 * step * kg2, ka3, kg3);
                rate(s4, A[p] + step * ka3, G[p] + step * kg3, ka4, kg4);
                A[p] += (step / 6.0) * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
                G[p] += (step / 6.0) * (kg1 + 2.0 * kg2 + 2.0 * kg3 + kg4);
                G[p] = 0.5 * (G[p] + G[p].transpose());
            } else {
                const auto rate = [&](const Stage& sg, const Ten3& a) {
                    return shape_rate(a, sg.L, sg.Ladj);
                };
                const Ten3 k1 = rate(s1, A[p]);
                const Ten3 k2 = rate(s2, A[p] + 0.5 * step * k1);
                const Ten3 k3 = rate(s2, A[p] + 0.5 * step * k2);
                const Ten3 k4 = rate(s4, A[p] + step * k3);
                A[p] += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }

            double drift = 0.0;
            A[p] = project_h_symmetric(A[p], h, &drift);
            traj.max_symmetry_drift = std::max(traj.max_symmetry_drift, drift);

            const HSymTensor check(A[p], h, false);
            if (!(check.eigenvalues().minCoeff() > 1e-14))
                throw NonPositiveShapeError("shape lost positivity during evolution at t = " +
                                            std::to_string(t + step));
        }

        if ((s + 1) % record_stride == 0 || s + 1 == nsteps) record(t + step);
    }
    return traj;
}

}  // namespace detail

// Evolve the elastic shape tensor along the motion: Adot = L A + A L+.
inline Trajectory evolve_shape(const std::vector<Vec3>& labels,
                               const std::vector<HSymTensor>& initial_shapes,
                               const MotionSpec& motion, const Metric3& h, double t0, double t1,
                               double dt, int record_stride = 1) {
    return detail::evolve_points(labels, initial_shapes, motion, h, t0, t1, dt, nullptr,
                                 record_stride);
}

inline Trajectory evolve_shape(const HSymTensor& initial_shape, const MotionSpec& motion,
                               const Metric3& h, double t0, double t1, double dt,
                               int record_stride = 1) {
    return evolve_shape({Vec3::Zero()}, {initial_shape}, motion, h, t0, t1, dt, record_stride);
}

// Evolve the inertial Cauchy deformedness: Edot = sym_h(L). Linear in the
// state, so the same RK4 driver integrates it exactly up to quadrature error.
// The relaxed-metric slot of the result is the constant h.
inline Trajectory evolve_inertial_cauchy(const std::vector<Vec3>& labels,
                                         const std::vector<HSymTensor>& initial_values,
                                         const MotionSpec& motion, const Metric3& h, double t0,
                                         double t1, double dt, int record_stride = 1) {
    if (!(dt > 0.0)) throw DomainError("evolution needs dt > 0");
    if (!(t1 > t0)) throw DomainError("evolution needs t1 > t0");
    const long long nsteps = std::max(1LL, std::llround((t1 - t0) / dt));
    const double step = (t1 - t0) / static_cast<double>(nsteps);

    const Ten3 k0_inv = motion.affine(t0).K.inverse();
    std::vector<Ten3> E(labels.size());
    for (std::size_t p = 0; p < labels.size(); ++p) E[p] = initial_values[p].matrix();

    Trajectory traj;
    traj.dt = step;
    traj.metric = h;
    const auto record = [&](double t) {
        ShapeState st;
        st.time = t;
        st.velocity_gradient = motion.velocity_gradient(t);
        st.points.resize(labels.size());
        const Ten3 j = motion.affine(t).K * k0_inv;
        for (std::size_t p = 0; p < labels.size(); ++p) {
            st.points[p].label = labels[p];
            st.points[p].shape = HSymTensor(E[p], h, false);
            st.points[p].jacobian = j;
            st.points[p].relaxed_metric = h;
        }
        traj.states.push_back(std::move(st));
    };

    record(t0);
    const auto rate = [&](double t) {
        return Ten3(0.5 * (motion.velocity_gradient(t) +
                           h_adjoint(motion.velocity_gradient(t), h)));
    };
    for (long long s = 0; s < nsteps; ++s) {
        const double t = t0 + step * static_cast<double>(s);
        const Ten3 k1 = rate(t);
        const Ten3 k2 = rate(t + 0.5 * step);
        const Ten3 k4 = rate(t + step);
        for (auto& e : E) e += (step / 6.0) * (k1 + 4.0 * k2 + k4);
        if ((s + 1) % record_stride == 0 || s + 1 == nsteps) record(t + step);
    }
    return traj;
}

inline Trajectory evolve_inertial_cauchy(const HSymTensor& initial_value,
                                         const MotionSpec& motion, const Metric3& h, double t0,
                                         double t1, double dt, int record_stride = 1) {
    return evolve_inertial_cauchy({Vec3::Zero()}, {initial_value}, motion, h, t0, t1, dt,
                                  record_stride);
}

// Which state function of A plays the role of the deformedness in the power
// identity: the logarithmic choice, or the small-deformedness surrogate
// (A - I)/2 that continues the inertial Cauchy measure to finite strains.
enum class DeformednessMeasure { hencky, half_shape_minus_identity };

inline HSymTensor deformedness_measure(const HSymTensor& A, DeformednessMeasure m) {
    if (m == DeformednessMeasure::hencky) return deformedness(A);
    return HSymTensor(0.5 * (A.matrix() - Ten3::Identity()), A.metric(), false);
}

struct PowerIdentityResult {
    // residuals[s][p]: |tr(sigma L) - rho Udot| at state s, point p. Endpoint
    // states use one-sided time differences, interior ones centered.
    std::vector<std::vector<double>> residuals;
    double max_relative = 0.0;  // over interior states, scaled by max |tr(sigma L)|
};

inline PowerIdentityResult power_identity_residual(
    const Trajectory& traj, const ElasticPotential& pot,
    DeformednessMeasure measure = DeformednessMeasure::hencky) {
    const std::size_t ns = traj.states.size();
    if (ns < 3) throw DomainError("power identity needs at least 3 recorded states");
    const std::size_t npts = traj.states.front().points.size();

    // Cache energies, densities and powers per state/point.
    std::vector<std::vector<double>> energy(ns, std::vector<double>(npts));
    std::vector<std::vector<double>> rho(ns, std::vector<double>(npts));
    std::vector<std::vector<double>> power(ns, std::vector<double>(npts));
    for (std::size_t s = 0; s < ns; ++s) {
        const Ten3& L = traj.states[s].velocity_gradient;
        for (std::size_t p = 0; p < npts; ++p) {
            const HSymTensor& A = traj.states[s].points[p].shape;
            const HSymTensor D = deformedness_measure(A, measure);
            energy[s][p] = pot.energy(D);
            rho[s][p] = pot.rho_relaxed / volume_ratio(A);
            power[s][p] = (stress_from_potential(D, pot, A).matrix() * L).trace();
        }
    }

    PowerIdentityResult out;
    out.residuals.assign(ns, std::vector<double>(npts, 0.0));
    double power_scale = 0.0;
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t p = 0; p < npts; ++p)
            power_scale = std::max(power_scale, std::abs(power[s][p]));
    if (power_scale == 0.0) power_scale = 1.0;

    const double dt_rec = traj.states[1].time - traj.states[0].time;
    for (std::size_t p = 0; p < npts; ++p) {
        for (std::size_t s = 0; s < ns; ++s) {
            double udot;
            if (s == 0)
                udot = (energy[1][p] - energy[0][p]) / dt_rec;
            else if (s == ns - 1)
                udot = (energy[ns - 1][p] - energy[ns - 2][p]) / dt_rec;
            else
                udot = (energy[s + 1][p] - energy[s - 1][p]) / (2.0 * dt_rec);
            const double res = std::abs(power[s][p] - rho[s][p] * udot);
            out.residuals[s][p] = res;
            if (s > 0 && s + 1 < ns)
                out.max_relative = std::max(out.max_relative, res / power_scale);
        }
    }
    return out;
}

}  // namespace shapekin
