#pragma once

// Trivariate polynomials and polynomial vector fields. These serve as exact
// analytic potentials for grid studies: values and Jacobians are closed-form,
// and composition with an affine map stays polynomial.

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "shapekin/tensor.hpp"

namespace shapekin {

struct Monomial {
    double coeff = 0.0;
    int px = 0, py = 0, pz = 0;
};

class PolyScalar {
public:
    PolyScalar() = default;
    explicit PolyScalar(std::vector<Monomial> terms) : terms_(std::move(terms)) { normalize(); }

    static PolyScalar constant(double c) { return PolyScalar({{c, 0, 0, 0}}); }
    static PolyScalar coordinate(int axis) {
        Monomial m{1.0, 0, 0, 0};
        if (axis == 0) m.px = 1;
        if (axis == 1) m.py = 1;
        if (axis == 2) m.pz = 1;
        return PolyScalar({m});
    }

    const std::vector<Monomial>& terms() const { return terms_; }

    double value(const Vec3& x) const {
        double acc = 0.0;
        for (const Monomial& m : terms_)
            acc += m.coeff * ipow(x.x(), m.px) * ipow(x.y(), m.py) * ipow(x.z(), m.pz);
        return acc;
    }

    PolyScalar derivative(int axis) const {
        std::vector<Monomial> out;
        for (const Monomial& m : terms_) {
            Monomial d = m;
            int* p = axis == 0 ? &d.px : axis == 1 ? &d.py : &d.pz;
            if (*p == 0) continue;
            d.coeff *= *p;
            --*p;
            out.push_back(d);
        }
        return PolyScalar(std::move(out));
    }

    PolyScalar operator+(const PolyScalar& o) const {
        std::vector<Monomial> t = terms_;
        t.insert(t.end(), o.terms_.begin(), o.terms_.end());
        return PolyScalar(std::move(t));
    }

    PolyScalar operator*(const PolyScalar& o) const {
        std::vector<Monomial> t;
        for (const Monomial& a : terms_)
            for (const Monomial& b : o.terms_)
                t.push_back({a.coeff * b.coeff, a.px + b.px, a.py + b.py, a.pz + b.pz});
        return PolyScalar(std::move(t));
    }

    PolyScalar scaled(double s) const {
        std::vector<Monomial> t = terms_;
        for (Monomial& m : t) m.coeff *= s;
        return PolyScalar(std::move(t));
    }

    // p(M x + b) as a polynomial in x.
    PolyScalar compose_affine(const Ten3& M, const Vec3& b) const {
        std::array<PolyScalar, 3> lin;
        for (int a = 0; a < 3; ++a) {
            std::vector<Monomial> t{{b[a], 0, 0, 0}};
            for (int c = 0; c < 3; ++c) {
                Monomial m{M(a, c), 0, 0, 0};
                (c == 0 ? m.px : c == 1 ? m.py : m.pz) = 1;
                t.push_back(m);
            }
            lin[a] = PolyScalar(std::move(t));
        }
        PolyScalar out;
        for (const Monomial& m : terms_) {
            PolyScalar term = PolyScalar::constant(m.coeff);
            for (int r = 0; r < m.px; ++r) term = term * lin[0];
            for (int r = 0; r < m.py; ++r) term = term * lin[1];
            for (int r = 0; r < m.pz; ++r) term = term * lin[2];
            out = out + term;
        }
        return out;
    }

private:
    static double ipow(double x, int n) {
        double acc = 1.0;
        for (int i = 0; i < n; ++i) acc *= x;
        return acc;
    }

    void normalize() {
        std::map<std::array<int, 3>, double> collected;
        for (const Monomial& m : terms_) collected[{m.px, m.py, m.pz}] += m.coeff;
        terms_.clear();
        for (const auto& [p, c] : collected)
            if (c != 0.0) terms_.push_back({c, p[0], p[1], p[2]});
    }

    std::vector<Monomial> terms_;
};

// Polynomial vector field q(x) with exact Jacobian.
class PolyVec3 {
public:
    PolyVec3() = default;
    PolyVec3(PolyScalar cx, PolyScalar cy, PolyScalar cz)
        : comp_{std::move(cx), std::move(cy), std::move(cz)} {}

    static PolyVec3 identity() {
        return PolyVec3(PolyScalar::coordinate(0), PolyScalar::coordinate(1),
                        PolyScalar::coordinate(2));
    }

    const PolyScalar& component(int i) const { return comp_[i]; }
    PolyScalar& component(int i) { return comp_[i]; }

    Vec3 value(const Vec3& x) const {
        return Vec3(comp_[0].value(x), comp_[1].value(x), comp_[2].value(x));
    }

    Ten3 jacobian(const Vec3& x) const {
        Ten3 j;
        for (int i = 0; i < 3; ++i)
            for (int a = 0; a < 3; ++a) j(i, a) = comp_[i].derivative(a).value(x);
        return j;
    }

    // q(M x + b) componentwise.
    PolyVec3 compose_affine(const Ten3& M, const Vec3& b) const {
        return PolyVec3(comp_[0].compose_affine(M, b), comp_[1].compose_affine(M, b),
                        comp_[2].compose_affine(M, b));
    }

    // R (q(x) - o) + o + c applied to the values.
    PolyVec3 apply_affine_to_values(const Ten3& R, const Vec3& o, const Vec3& c) const {
        PolyVec3 out;
        const Vec3 shift = o + c - R * o;
        for (int i = 0; i < 3; ++i) {
            PolyScalar acc = PolyScalar::constant(shift[i]);
            for (int j = 0; j < 3; ++j) acc = acc + comp_[j].scaled(R(i, j));
            out.comp_[i] = acc;
        }
        return out;
    }

private:
    std::array<PolyScalar, 3> comp_;
};

}  // namespace shapekin
