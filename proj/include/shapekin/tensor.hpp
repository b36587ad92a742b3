#pragma once

// Exact 3x3 tensor algebra in fixed-frame coordinates: metrics, metric-adjoints,
// polar decomposition, and analytic functions of metric-symmetric tensors.
//
// Conventions. All tensors are stored as plain 3x3 coordinate matrices in one
// fixed inertial frame. The distinction between material and spatial objects is
// carried by the attached metrics, not by the storage. A linear map A is called
// h-symmetric when h*A is a symmetric matrix; the h-adjoint of L is
// L+ = h^-1 * L^T * h, which reduces to the plain transpose for h = I.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

#include "shapekin/errors.hpp"

namespace shapekin {

using Ten3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

// Tolerance for exact algebraic identities.
inline constexpr double kAlgebraicTol = 1e-12;
// Tolerance for anything routed through an eigendecomposition.
inline constexpr double kEigenTol = 1e-10;

inline double frob(const Ten3& m) { return m.norm(); }

inline double rel_diff(const Ten3& a, const Ten3& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

// Symmetric positive definite spatial (or material) metric. Caches inverse and
// the symmetric square-root pair used by functions of h-symmetric tensors.
class Metric3 {
public:
    Metric3() { set(Ten3::Identity()); }

    explicit Metric3(const Ten3& entries) {
        if (!entries.allFinite()) throw MetricError("metric has non-finite entries");
        const double scale = entries.norm();
        if ((entries - entries.transpose()).norm() > kAlgebraicTol * std::max(scale, 1.0))
            throw MetricError("metric is not symmetric");
        set(0.5 * (entries + entries.transpose()));
    }

    static Metric3 identity() { return Metric3(); }

    const Ten3& matrix() const { return m_; }
    const Ten3& inverse() const { return inv_; }
    const Ten3& sqrt_matrix() const { return sqrt_; }
    const Ten3& inv_sqrt_matrix() const { return inv_sqrt_; }

    bool is_identity() const { return (m_ - Ten3::Identity()).norm() == 0.0; }

    double operator()(int i, int j) const { return m_(i, j); }

private:
    void set(const Ten3& sym) {
        Eigen::SelfAdjointEigenSolver<Ten3> es(sym);
        const Vec3 ev = es.eigenvalues();
        if (ev.minCoeff() <= 0.0) throw MetricError("metric is not positive definite");
        m_ = sym;
        const Ten3 v = es.eigenvectors();
        inv_ = v * ev.cwiseInverse().asDiagonal() * v.transpose();
        sqrt_ = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
        inv_sqrt_ = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
    }

    Ten3 m_, inv_, sqrt_, inv_sqrt_;
};

// h-adjoint of a linear map: L+ = h^-1 L^T h. Involutive and product-reversing.
inline Ten3 h_adjoint(const Ten3& L, const Metric3& h) {
    return h.inverse() * L.transpose() * h.matrix();
}

// A linear map together with the metric it is symmetric against.
class HSymTensor {
public:
    HSymTensor() : m_(Ten3::Zero()) {}

    HSymTensor(const Ten3& entries, const Metric3& h, bool validate = true) : m_(entries), h_(h) {
        if (validate) {
            const Ten3 hm = h_.matrix() * m_;
            const double scale = std::max(hm.norm(), 1.0);
            if ((hm - hm.transpose()).norm() > 1e-9 * scale)
                throw SymmetryError("tensor is not h-symmetric");
        }
    }

    const Ten3& matrix() const { return m_; }
    const Metric3& metric() const { return h_; }

    // Eigenvalues (real, ascending) via the similar symmetric matrix
    // B = h^{1/2} A h^{-1/2}.
    Vec3 eigenvalues() const {
        const Ten3 b = h_.sqrt_matrix() * m_ * h_.inv_sqrt_matrix();
        Eigen::SelfAdjointEigenSolver<Ten3> es(0.5 * (b + b.transpose()));
        return es.eigenvalues();
    }

    bool is_spd(double tol = 0.0) const { return eigenvalues().minCoeff() > tol; }

private:
    Ten3 m_;
    Metric3 h_;
};

// h-symmetric part of a velocity-gradient-like map: (L + L+)/2.
inline HSymTensor sym_part_h(const Ten3& L, const Metric3& h) {
    return HSymTensor(0.5 * (L + h_adjoint(L, h)), h, false);
}

// Projection onto the h-symmetric subspace, plus the relative drift removed.
inline Ten3 project_h_symmetric(const Ten3& A, const Metric3& h, double* drift = nullptr) {
    const Ten3 proj = 0.5 * (A + h_adjoint(A, h));
    if (drift) {
        const double scale = std::max(A.norm(), 1.0);
        *drift = (A - proj).norm() / scale;
    }
    return proj;
}

struct PolarDecomposition {
    Ten3 rotation;            // O, orthogonal with det +1
    HSymTensor stretch_right; // U_R = sqrt(F^T F)
    HSymTensor stretch_left;  // U_L = sqrt(F F^T)
};

// F = O U_R = U_L O with Euclidean metric. Requires det F > 0.
inline PolarDecomposition polar_decompose(const Ten3& F) {
    if (!(F.determinant() > 0.0))
        throw SingularCompressionError("polar decomposition requires det F > 0");
    Eigen::JacobiSVD<Ten3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Ten3 u = svd.matrixU();
    const Ten3 v = svd.matrixV();
    const Vec3 s = svd.singularValues();
    const Metric3 id;
    PolarDecomposition out;
    out.rotation = u * v.transpose();
    out.stretch_right = HSymTensor(v * s.asDiagonal() * v.transpose(), id, false);
    out.stretch_left = HSymTensor(u * s.asDiagonal() * u.transpose(), id, false);
    return out;
}

// f(A) for h-symmetric A, computed through the symmetric similar matrix
// B = h^{1/2} A h^{-1/2} = V diag(lambda) V^T, result h^{-1/2} V f(lambda) V^T h^{1/2}.
// Eigenvalues of the result are f(eigenvalues of A). Throws NonPositiveShapeError
// when f produces a non-finite value on some eigenvalue.
inline HSymTensor func_of_hsym(const HSymTensor& A, const std::function<double(double)>& f) {
    const Metric3& h = A.metric();
    const Ten3 b = h.sqrt_matrix() * A.matrix() * h.inv_sqrt_matrix();
    Eigen::SelfAdjointEigenSolver<Ten3> es(0.5 * (b + b.transpose()));
    Vec3 fe;
    for (int i = 0; i < 3; ++i) {
        fe[i] = f(es.eigenvalues()[i]);
        if (!std::isfinite(fe[i]))
            throw NonPositiveShapeError("scalar function undefined on an eigenvalue");
    }
    const Ten3 fb = es.eigenvectors() * fe.asDiagonal() * es.eigenvectors().transpose();
    return HSymTensor(h.inv_sqrt_matrix() * fb * h.sqrt_matrix(), h, false);
}

inline HSymTensor log_hsym(const HSymTensor& A) {
    if (!(A.eigenvalues().minCoeff() > 0.0))
        throw NonPositiveShapeError("log of a non-positive tensor");
    return func_of_hsym(A, [](double x) { return std::log(x); });
}

inline HSymTensor sqrt_hsym(const HSymTensor& A) {
    if (!(A.eigenvalues().minCoeff() > 0.0))
        throw NonPositiveShapeError("sqrt of a non-positive tensor");
    return func_of_hsym(A, [](double x) { return std::sqrt(x); });
}

inline HSymTensor exp_hsym(const HSymTensor& A) {
    return func_of_hsym(A, [](double x) { return std::exp(x); });
}

// A^p through eigenvalues; requires positivity for non-integer p.
inline HSymTensor pow_hsym(const HSymTensor& A, double p) {
    if (!(A.eigenvalues().minCoeff() > 0.0))
        throw NonPositiveShapeError("power of a non-positive tensor");
    return func_of_hsym(A, [p](double x) { return std::pow(x, p); });
}

struct DetTraceDev {
    double det = 0.0;
    double trace = 0.0;
    HSymTensor deviator;
};

// Determinant, trace and trace-free part A - (tr A / 3) I.
inline DetTraceDev det_trace_dev(const HSymTensor& A) {
    DetTraceDev out;
    out.det = A.matrix().determinant();
    out.trace = A.matrix().trace();
    out.deviator = HSymTensor(A.matrix() - (out.trace / 3.0) * Ten3::Identity(), A.metric(), false);
    return out;
}

}  // namespace shapekin
