#pragma once

// Classical deformation and strain families built from the deformation
// gradient: Cauchy-Green tensors (U_L^n, U_R^n), the strain series
// E^(n) = (U^n - I)/n with the logarithmic n = 0 member, and the
// small-strain Cauchy measure F^S - I. All of these are frame-based
// Euclidean objects; the metric-aware state variables live in shape.hpp.

#include <cmath>

#include "shapekin/tensor.hpp"

namespace shapekin {

enum class Side { left, right };

// Member of the deformation/strain family: real exponent n plus the
// left/right distinction. n = 0 selects the logarithmic (Hencky) member.
struct StrainFamilyIndex {
    double exponent = 0.0;
    Side side = Side::right;
};

namespace detail {

// U_side^2 as an (Euclidean) HSymTensor; throws for det F <= 0.
inline HSymTensor stretch_squared(const Ten3& F, Side side) {
    if (!(F.determinant() > 0.0))
        throw SingularCompressionError("deformation gradient has det <= 0");
    const Ten3 m = side == Side::right ? Ten3(F.transpose() * F) : Ten3(F * F.transpose());
    return HSymTensor(m, Metric3::identity(), false);
}

}  // namespace detail

// Deformation tensor C^(n) = (U_side)^n, evaluated through eigenvalues of U^2.
inline HSymTensor cauchy_green(const Ten3& F, const StrainFamilyIndex& idx) {
    const HSymTensor u2 = detail::stretch_squared(F, idx.side);
    if (idx.exponent == 2.0) return u2;
    return pow_hsym(u2, idx.exponent / 2.0);
}

// Strain tensor E^(n) = [(U_side)^n - I]/n, with the l'Hopital limit
// E^(0) = ln U_side.
inline HSymTensor strain_family(const Ten3& F, const StrainFamilyIndex& idx) {
    const HSymTensor u2 = detail::stretch_squared(F, idx.side);
    if (idx.exponent == 0.0) {
        const HSymTensor lnu2 = log_hsym(u2);
        return HSymTensor(0.5 * lnu2.matrix(), lnu2.metric(), false);
    }
    const HSymTensor c = pow_hsym(u2, idx.exponent / 2.0);
    return HSymTensor((c.matrix() - Ten3::Identity()) / idx.exponent, c.metric(), false);
}

// Cauchy strain F^S - I; linear in the displacement gradient.
inline HSymTensor cauchy_strain(const Ten3& F) {
    const Ten3 sym = 0.5 * (F + F.transpose());
    return HSymTensor(sym - Ten3::Identity(), Metric3::identity(), false);
}

// Composition of deformation gradients across reference instants:
// F(t2<-t0) = F(t2<-t1) * F(t1<-t0). Both factors must be invertible.
inline Ten3 compose_F(const Ten3& F_21, const Ten3& F_10) {
    if (F_21.determinant() == 0.0 || F_10.determinant() == 0.0)
        throw SingularCompressionError("composing a singular deformation gradient");
    return F_21 * F_10;
}

}  // namespace shapekin
