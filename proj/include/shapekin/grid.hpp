#pragma once

// Structured box grids carrying scalar/vector/tensor samples, with
// second-order finite-difference gradient, divergence and curl operators and
// the Saint-Venant double curl.
//
// Index conventions, fixed once for the whole project:
//   vector fields      u[i],          grad(u)[i,p]   = d_p u_i      (u (x) nabla)
//   tensor fields      E[i,j],        grad(E)[i,j,p] = d_p E_ij
//   left curl          (nabla x E)_ij = eps_ipq d_p E_qj
//   right curl         (E x nabla)_ij = eps_jpq d_p E_iq
// Components are stored flat per node, last index fastest. Worked component
// example: for E = diag(y^2, 0, 0) the double curl nabla x E x nabla has the
// single nonzero component (3,3) = d2_yy E_11 = 2.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shapekin/errors.hpp"
#include "shapekin/parallel.hpp"
#include "shapekin/tensor.hpp"

namespace shapekin {

enum class Boundary { periodic, one_sided };

struct Grid3 {
    Vec3 origin = Vec3::Zero();
    Vec3 spacing = Vec3::Ones();
    std::array<int, 3> counts = {5, 5, 5};
    Boundary boundary = Boundary::one_sided;

    Grid3() = default;
    Grid3(const Vec3& origin_, const Vec3& spacing_, const std::array<int, 3>& counts_,
          Boundary boundary_ = Boundary::one_sided)
        : origin(origin_), spacing(spacing_), counts(counts_), boundary(boundary_) {
        for (int a = 0; a < 3; ++a) {
            if (counts[a] < 5) throw GridError("grid needs at least 5 nodes per axis");
            if (!(spacing[a] > 0.0)) throw GridError("grid spacing must be positive");
        }
    }

    // Box-preserving uniform box over [lo, hi].
    static Grid3 box(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& counts,
                     Boundary boundary = Boundary::one_sided) {
        Vec3 spacing;
        for (int a = 0; a < 3; ++a) {
            const int cells = boundary == Boundary::periodic ? counts[a] : counts[a] - 1;
            if (cells < 1) throw GridError("grid needs at least 5 nodes per axis");
            spacing[a] = (hi[a] - lo[a]) / cells;
        }
        return Grid3(lo, spacing, counts, boundary);
    }

    std::int64_t node_count() const {
        return static_cast<std::int64_t>(counts[0]) * counts[1] * counts[2];
    }

    std::int64_t index(int i, int j, int k) const {
        return (static_cast<std::int64_t>(i) * counts[1] + j) * counts[2] + k;
    }

    Vec3 node(int i, int j, int k) const {
        return origin + Vec3(i * spacing[0], j * spacing[1], k * spacing[2]);
    }

    bool interior(int i, int j, int k, int margin) const {
        if (boundary == Boundary::periodic) return true;
        return i >= margin && i < counts[0] - margin && j >= margin && j < counts[1] - margin &&
               k >= margin && k < counts[2] - margin;
    }

    // Same box, spacing divided by factor.
    Grid3 refine(int factor) const {
        if (factor < 2) throw GridError("refinement factor must be >= 2");
        Grid3 g = *this;
        for (int a = 0; a < 3; ++a) {
            const std::int64_t scaled =
                boundary == Boundary::periodic
                    ? static_cast<std::int64_t>(counts[a]) * factor
                    : static_cast<std::int64_t>(counts[a] - 1) * factor + 1;
            if (scaled > (1 << 24)) throw GridError("refined grid would overflow node counts");
            g.counts[a] = static_cast<int>(scaled);
            g.spacing[a] = spacing[a] / factor;
        }
        return g;
    }

    bool same_layout(const Grid3& o) const {
        return counts == o.counts && boundary == o.boundary &&
               (origin - o.origin).norm() < 1e-14 && (spacing - o.spacing).norm() < 1e-14;
    }
};

// Grid samples with 1 (scalar), 3 (vector), 9 (rank-2) or 27 (rank-3)
// components per node.
class Field {
public:
    Field() = default;
    Field(const Grid3& grid, int comps) : grid_(grid), comps_(comps) {
        data_.assign(static_cast<std::size_t>(grid_.node_count()) * comps_, 0.0);
    }

    static Field scalar(const Grid3& g) { return Field(g, 1); }
    static Field vector(const Grid3& g) { return Field(g, 3); }
    static Field tensor(const Grid3& g) { return Field(g, 9); }
    static Field tensor3(const Grid3& g) { return Field(g, 27); }

    const Grid3& grid() const { return grid_; }
    int comps() const { return comps_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double& at(int i, int j, int k, int c = 0) {
        return data_[static_cast<std::size_t>(grid_.index(i, j, k)) * comps_ + c];
    }
    double at(int i, int j, int k, int c = 0) const {
        return data_[static_cast<std::size_t>(grid_.index(i, j, k)) * comps_ + c];
    }

    Vec3 vector_at(int i, int j, int k) const {
        return Vec3(at(i, j, k, 0), at(i, j, k, 1), at(i, j, k, 2));
    }
    void set_vector(int i, int j, int k, const Vec3& v) {
        for (int c = 0; c < 3; ++c) at(i, j, k, c) = v[c];
    }

    Ten3 tensor_at(int i, int j, int k) const {
        Ten3 m;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m(a, b) = at(i, j, k, a * 3 + b);
        return m;
    }
    void set_tensor(int i, int j, int k, const Ten3& m) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) at(i, j, k, a * 3 + b) = m(a, b);
    }

    static Field sample_scalar(const Grid3& g, const std::function<double(const Vec3&)>& fn) {
        Field f = scalar(g);
        f.fill([&](int i, int j, int k, Field& out) { out.at(i, j, k) = fn(g.node(i, j, k)); });
        return f;
    }
    static Field sample_vector(const Grid3& g, const std::function<Vec3(const Vec3&)>& fn) {
        Field f = vector(g);
        f.fill([&](int i, int j, int k, Field& out) { out.set_vector(i, j, k, fn(g.node(i, j, k))); });
        return f;
    }
    static Field sample_tensor(const Grid3& g, const std::function<Ten3(const Vec3&)>& fn) {
        Field f = tensor(g);
        f.fill([&](int i, int j, int k, Field& out) { out.set_tensor(i, j, k, fn(g.node(i, j, k))); });
        return f;
    }

    template <class Fn>
    void fill(Fn&& fn) {
        const int ny = grid_.counts[1];
        const int nz = grid_.counts[2];
        parallel_for(static_cast<std::ptrdiff_t>(grid_.node_count()), [&](std::ptrdiff_t n) {
            const int k = static_cast<int>(n % nz);
            const int j = static_cast<int>((n / nz) % ny);
            const int i = static_cast<int>(n / (static_cast<std::ptrdiff_t>(ny) * nz));
            fn(i, j, k, *this);
        });
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    Grid3 grid_;
    int comps_ = 1;
    std::vector<double> data_;
};

namespace fd {

// d(component comp)/d(axis) at one node: second-order central in the
// interior, periodic wrap or one-sided three-point at the edges.
inline double deriv_at(const Field& f, int comp, int axis, int i, int j, int k) {
    const Grid3& g = f.grid();
    const int n = g.counts[axis];
    const double inv2h = 1.0 / (2.0 * g.spacing[axis]);
    int idx[3] = {i, j, k};
    const auto value = [&](int shifted) {
        int p[3] = {idx[0], idx[1], idx[2]};
        p[axis] = shifted;
        return f.at(p[0], p[1], p[2], comp);
    };
    const int c = idx[axis];
    if (g.boundary == Boundary::periodic) {
        const int up = (c + 1) % n;
        const int dn = (c - 1 + n) % n;
        return (value(up) - value(dn)) * inv2h;
    }
    if (c == 0) return (-3.0 * value(0) + 4.0 * value(1) - value(2)) * inv2h;
    if (c == n - 1) return (3.0 * value(n - 1) - 4.0 * value(n - 2) + value(n - 3)) * inv2h;
    return (value(c + 1) - value(c - 1)) * inv2h;
}

constexpr int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

}  // namespace fd

// Gradient raises the rank by one; the derivative index is appended last.
inline Field grad(const Field& f) {
    const int c = f.comps();
    if (c != 1 && c != 3 && c != 9) throw GridError("grad supports ranks 0..2");
    Field out(f.grid(), c * 3);
    out.fill([&](int i, int j, int k, Field& o) {
        for (int m = 0; m < c; ++m)
            for (int p = 0; p < 3; ++p)
                o.at(i, j, k, m * 3 + p) = fd::deriv_at(f, m, p, i, j, k);
    });
    return out;
}

inline Field div(const Field& f) {
    if (f.comps() != 3) throw GridError("div expects a vector field");
    Field out = Field::scalar(f.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        o.at(i, j, k) = fd::deriv_at(f, 0, 0, i, j, k) + fd::deriv_at(f, 1, 1, i, j, k) +
                        fd::deriv_at(f, 2, 2, i, j, k);
    });
    return out;
}

inline Field curl_vec(const Field& f) {
    if (f.comps() != 3) throw GridError("curl_vec expects a vector field");
    Field out = Field::vector(f.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        for (int a = 0; a < 3; ++a) {
            double acc = 0.0;
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) {
                    const int e = fd::levi_civita(a, p, q);
                    if (e) acc += e * fd::deriv_at(f, q, p, i, j, k);
                }
            o.at(i, j, k, a) = acc;
        }
    });
    return out;
}

// (nabla x E)_ij = eps_ipq d_p E_qj
inline Field curl_left(const Field& f) {
    if (f.comps() != 9) throw GridError("curl_left expects a rank-2 field");
    Field out = Field::tensor(f.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double acc = 0.0;
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q) {
                        const int e = fd::levi_civita(a, p, q);
                        if (e) acc += e * fd::deriv_at(f, q * 3 + b, p, i, j, k);
                    }
                o.at(i, j, k, a * 3 + b) = acc;
            }
    });
    return out;
}

// (E x nabla)_ij = eps_jpq d_p E_iq
inline Field curl_right(const Field& f) {
    if (f.comps() != 9) throw GridError("curl_right expects a rank-2 field");
    Field out = Field::tensor(f.grid());
    out.fill([&](int i, int j, int k, Field& o) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double acc = 0.0;
                for (int p = 0; p < 3; ++p)
                    for (int q = 0; q < 3; ++q) {
                        const int e = fd::levi_civita(b, p, q);
                        if (e) acc += e * fd::deriv_at(f, a * 3 + q, p, i, j, k);
                    }
                o.at(i, j, k, a * 3 + b) = acc;
            }
    });
    return out;
}

// Root-mean-square over all components of nodes at least `margin` away from a
// non-periodic boundary. Accumulation order is fixed by the node index.
inline double interior_rms(const Field& f, int margin) {
    const auto [nx, ny, nz] = f.grid().counts;
    double acc = 0.0;
    std::int64_t n = 0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                if (!f.grid().interior(i, j, k, margin)) continue;
                for (int c = 0; c < f.comps(); ++c) {
                    const double v = f.at(i, j, k, c);
                    acc += v * v;
                }
                ++n;
            }
    if (n == 0) throw GridError("no interior nodes at requested margin");
    return std::sqrt(acc / (static_cast<double>(n) * f.comps()));
}

// Margin used for norms of doubly-differentiated quantities.
inline constexpr int kSecondDerivMargin = 2;

struct SaintVenantResult {
    Field residual;   // nabla x E x nabla, rank 2
    double rms = 0.0; // interior-only RMS (margin 2)
};

// Double curl of a symmetric rank-2 field. Input symmetry is checked to 1e-10
// relative per node.
inline SaintVenantResult saint_venant_residual(const Field& e) {
    if (e.comps() != 9) throw GridError("saint_venant_residual expects a rank-2 field");
    const auto [nx, ny, nz] = e.grid().counts;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k) {
                const Ten3 m = e.tensor_at(i, j, k);
                const double scale = std::max(m.norm(), 1.0);
                if ((m - m.transpose()).norm() > 1e-10 * scale)
                    throw SymmetryError("saint_venant_residual needs a symmetric field");
            }
    SaintVenantResult out;
    out.residual = curl_right(curl_left(e));
    out.rms = interior_rms(out.residual, kSecondDerivMargin);
    return out;
}

}  // namespace shapekin
