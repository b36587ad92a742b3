#pragma once

// Analytic motions with exact deformation gradients and velocity gradients.
//
// Every motion in this family is affine in the material labels,
// x = K(t) X + c(t), with K and c assembled from closed-form time functions.
// That keeps F = K, v = Kdot X + cdot and L = Kdot K^-1 exact, so evolution
// tests always have an analytic reference. Material labels X are the
// coordinates of the placement at the declared start time; primitive motions
// are the identity placement there. Compositions and superposed rigid
// motions keep the labels of their base motion.

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "shapekin/tensor.hpp"

namespace shapekin {

// Closed-form scalar function of time with exact derivative.
class TimeFunction {
public:
    TimeFunction() : coeffs_{0.0} {}

    static TimeFunction constant(double c) { return polynomial({c}); }

    // sum_k coeffs[k] * t^k
    static TimeFunction polynomial(std::vector<double> coeffs) {
        TimeFunction f;
        f.kind_ = Kind::poly;
        f.coeffs_ = std::move(coeffs);
        if (f.coeffs_.empty()) f.coeffs_.push_back(0.0);
        return f;
    }

    // amplitude * sin(omega t + phase) + offset
    static TimeFunction sinusoid(double amplitude, double omega, double phase = 0.0,
                                 double offset = 0.0) {
        TimeFunction f;
        f.kind_ = Kind::sinusoid;
        f.a_ = amplitude;
        f.b_ = omega;
        f.c_ = phase;
        f.d_ = offset;
        return f;
    }

    // amplitude * exp(rate t)
    static TimeFunction exponential(double amplitude, double rate) {
        TimeFunction f;
        f.kind_ = Kind::exponential;
        f.a_ = amplitude;
        f.b_ = rate;
        return f;
    }

    double value(double t) const {
        switch (kind_) {
            case Kind::poly: {
                double acc = 0.0;
                for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
                return acc;
            }
            case Kind::sinusoid:
                return a_ * std::sin(b_ * t + c_) + d_;
            case Kind::exponential:
            default:
                return a_ * std::exp(b_ * t);
        }
    }

    double derivative(double t) const {
        switch (kind_) {
            case Kind::poly: {
                double acc = 0.0;
                for (std::size_t k = coeffs_.size(); k-- > 1;)
                    acc = acc * t + static_cast<double>(k) * coeffs_[k];
                return acc;
            }
            case Kind::sinusoid:
                return a_ * b_ * std::cos(b_ * t + c_);
            case Kind::exponential:
            default:
                return a_ * b_ * std::exp(b_ * t);
        }
    }

private:
    enum class Kind { poly, sinusoid, exponential };
    Kind kind_ = Kind::poly;
    std::vector<double> coeffs_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
};

// Affine data of a motion at one instant.
struct AffineSample {
    Ten3 K = Ten3::Identity();
    Ten3 Kdot = Ten3::Zero();
    Vec3 c = Vec3::Zero();
    Vec3 cdot = Vec3::Zero();
};

// Time t together with a material label and its spatial position.
struct Placement {
    double t = 0.0;
    Vec3 label = Vec3::Zero();
    Vec3 position = Vec3::Zero();
};

inline Ten3 skew(const Vec3& w) {
    Ten3 n;
    n << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return n;
}

class MotionSpec {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        virtual ~Node() = default;
        virtual AffineSample sample(double t) const = 0;
    };

public:
    // --- primitive constructions (identity placement at t0) ---

    static MotionSpec identity(double t0, double t1) {
        struct N : Node {
            AffineSample sample(double) const override { return {}; }
        };
        return make(std::make_shared<N>(), t0, t1);
    }

    // x = K(t) X + c(t) from per-entry time functions.
    static MotionSpec homogeneous_linear(const std::array<std::array<TimeFunction, 3>, 3>& K,
                                         const std::array<TimeFunction, 3>& c, double t0,
                                         double t1) {
        struct N : Node {
            std::array<std::array<TimeFunction, 3>, 3> K;
            std::array<TimeFunction, 3> c;
            AffineSample sample(double t) const override {
                AffineSample s;
                for (int i = 0; i < 3; ++i) {
                    s.c[i] = c[i].value(t);
                    s.cdot[i] = c[i].derivative(t);
                    for (int j = 0; j < 3; ++j) {
                        s.K(i, j) = K[i][j].value(t);
                        s.Kdot(i, j) = K[i][j].derivative(t);
                    }
                }
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->K = K;
        n->c = c;
        return make(n, t0, t1);
    }

    // x = X + gamma(t) X_2 e_1
    static MotionSpec simple_shear(const TimeFunction& gamma, double t0, double t1) {
        struct N : Node {
            TimeFunction gamma;
            AffineSample sample(double t) const override {
                AffineSample s;
                s.K(0, 1) = gamma.value(t);
                s.Kdot(0, 1) = gamma.derivative(t);
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->gamma = gamma;
        return make(n, t0, t1);
    }

    // x = (lambda(t) X_1, X_2, X_3)
    static MotionSpec uniaxial(const TimeFunction& stretch, double t0, double t1) {
        struct N : Node {
            TimeFunction stretch;
            AffineSample sample(double t) const override {
                AffineSample s;
                s.K(0, 0) = stretch.value(t);
                s.Kdot(0, 0) = stretch.derivative(t);
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->stretch = stretch;
        return make(n, t0, t1);
    }

    // Rotation about an axis through the origin by angle theta(t).
    static MotionSpec rigid_rotation(const Vec3& axis, const TimeFunction& angle, double t0,
                                     double t1) {
        struct N : Node {
            Vec3 axis;
            TimeFunction angle;
            AffineSample sample(double t) const override {
                AffineSample s;
                s.K = Eigen::AngleAxisd(angle.value(t), axis).toRotationMatrix();
                s.Kdot = angle.derivative(t) * skew(axis) * s.K;
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->axis = axis.normalized();
        n->angle = angle;
        return make(n, t0, t1);
    }

    // x = s(t) X
    static MotionSpec radial(const TimeFunction& scale, double t0, double t1) {
        struct N : Node {
            TimeFunction scale;
            AffineSample sample(double t) const override {
                AffineSample s;
                s.K = scale.value(t) * Ten3::Identity();
                s.Kdot = scale.derivative(t) * Ten3::Identity();
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->scale = scale;
        return make(n, t0, t1);
    }

    // Motion with a prescribed constant velocity gradient: K = exp((t-t0) L0).
    static MotionSpec constant_velocity_gradient(const Ten3& L0, double t0, double t1) {
        struct N : Node {
            Ten3 L0;
            double t0;
            AffineSample sample(double t) const override {
                AffineSample s;
                s.K = (((t - t0) * L0).exp()).eval();
                s.Kdot = L0 * s.K;
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->L0 = L0;
        n->t0 = t0;
        return make(n, t0, t1);
    }

    // x = second(t, first(t, X)); labels are the first motion's labels.
    static MotionSpec composition(const MotionSpec& second, const MotionSpec& first) {
        struct N : Node {
            NodePtr outer, inner;
            AffineSample sample(double t) const override {
                const AffineSample a = inner->sample(t);
                const AffineSample b = outer->sample(t);
                AffineSample s;
                s.K = b.K * a.K;
                s.Kdot = b.Kdot * a.K + b.K * a.Kdot;
                s.c = b.K * a.c + b.c;
                s.cdot = b.Kdot * a.c + b.K * a.cdot + b.cdot;
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->outer = second.node_;
        n->inner = first.node_;
        const double t0 = std::max(second.t0_, first.t0_);
        const double t1 = std::min(second.t1_, first.t1_);
        if (!(t0 < t1)) throw DomainError("composed motions have disjoint time windows");
        return make(n, t0, t1);
    }

    // --- objectivity test transforms ---

    // x' = Q(t) (x - origin) + origin + translation(t), with
    // Q(t) = R(axis, angle(t)) * Q0. Q0 must be orthogonal.
    MotionSpec superpose_rigid(const Ten3& Q0, const Vec3& axis, const TimeFunction& angle,
                               const Vec3& origin = Vec3::Zero(),
                               const std::array<TimeFunction, 3>& translation = {}) const {
        if ((Q0.transpose() * Q0 - Ten3::Identity()).norm() > 1e-10)
            throw FrameError("superposed rotation is not orthogonal");
        struct N : Node {
            NodePtr base;
            Ten3 Q0;
            Vec3 axis, origin;
            TimeFunction angle;
            std::array<TimeFunction, 3> translation;
            AffineSample sample(double t) const override {
                const AffineSample a = base->sample(t);
                const Ten3 R = Eigen::AngleAxisd(angle.value(t), axis).toRotationMatrix();
                const Ten3 Q = R * Q0;
                const Ten3 Qdot = angle.derivative(t) * skew(axis) * Q;
                Vec3 tr, trdot;
                for (int i = 0; i < 3; ++i) {
                    tr[i] = translation[i].value(t);
                    trdot[i] = translation[i].derivative(t);
                }
                AffineSample s;
                s.K = Q * a.K;
                s.Kdot = Qdot * a.K + Q * a.Kdot;
                s.c = Q * (a.c - origin) + origin + tr;
                s.cdot = Qdot * (a.c - origin) + Q * a.cdot + trdot;
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->base = node_;
        n->Q0 = Q0;
        n->axis = axis.norm() > 0.0 ? axis.normalized() : Vec3::UnitZ();
        n->origin = origin;
        n->angle = angle;
        n->translation = translation;
        return make_copy_window(n);
    }

    MotionSpec superpose_rigid(const Vec3& axis, const TimeFunction& angle,
                               const Vec3& origin = Vec3::Zero(),
                               const std::array<TimeFunction, 3>& translation = {}) const {
        return superpose_rigid(Ten3::Identity(), axis, angle, origin, translation);
    }

    // x' = x - V t. Leaves K (hence F and L) untouched.
    MotionSpec galilean_boost(const Vec3& V) const {
        struct N : Node {
            NodePtr base;
            Vec3 V;
            AffineSample sample(double t) const override {
                AffineSample s = base->sample(t);
                s.c -= V * t;
                s.cdot -= V;
                return s;
            }
        };
        auto n = std::make_shared<N>();
        n->base = node_;
        n->V = V;
        return make_copy_window(n);
    }

    // --- evaluation ---

    double t_start() const { return t0_; }
    double t_end() const { return t1_; }

    AffineSample affine(double t) const {
        const double slack = 1e-9 * (1.0 + std::abs(t1_ - t0_));
        if (t < t0_ - slack || t > t1_ + slack)
            throw DomainError("time outside the declared motion interval");
        return node_->sample(t);
    }

    // Position and velocity of the material point labelled X.
    std::pair<Vec3, Vec3> evaluate(double t, const Vec3& X) const {
        const AffineSample s = affine(t);
        return {s.K * X + s.c, s.Kdot * X + s.cdot};
    }

    Placement place(double t, const Vec3& X) const {
        return Placement{t, X, evaluate(t, X).first};
    }

    // F = dx/dX with respect to this motion's material labels.
    Ten3 deformation_gradient(double t) const { return affine(t).K; }

    // Deformation gradient relative to the placement at the start time.
    Ten3 relative_deformation_gradient(double t) const {
        const Ten3 k0 = affine(t0_).K;
        return affine(t).K * k0.inverse();
    }

    // L = Fdot F^-1; spatially uniform for this affine family.
    Ten3 velocity_gradient(double t) const {
        const AffineSample s = affine(t);
        return s.Kdot * s.K.inverse();
    }

    // h-distance of the placements of two material points at time t.
    double current_distance(double t, const Vec3& P, const Vec3& Q,
                            const Metric3& h = Metric3::identity()) const {
        const Vec3 d = evaluate(t, Q).first - evaluate(t, P).first;
        return std::sqrt(d.dot(h.matrix() * d));
    }

private:
    static MotionSpec make(NodePtr node, double t0, double t1) {
        if (!(t0 < t1)) throw DomainError("motion needs t_start < t_end");
        MotionSpec m;
        m.node_ = std::move(node);
        m.t0_ = t0;
        m.t1_ = t1;
        m.validate_determinant();
        return m;
    }

    MotionSpec make_copy_window(NodePtr node) const { return make(std::move(node), t0_, t1_); }

    void validate_determinant() const {
        constexpr int kSamples = 33;
        for (int i = 0; i <= kSamples; ++i) {
            const double t = t0_ + (t1_ - t0_) * i / kSamples;
            if (!(node_->sample(t).K.determinant() > 0.0))
                throw SingularCompressionError("motion reaches det(dx/dX) <= 0");
        }
    }

    NodePtr node_;
    double t0_ = 0.0, t1_ = 1.0;
};

}  // namespace shapekin
