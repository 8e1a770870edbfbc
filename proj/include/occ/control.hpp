#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "occ/mesh.hpp"

namespace occ {

/// Symmetric 2x2 matrix stored as (a11, a22, a12).
using SymMat = std::array<double, 3>;

inline SymMat sym_add(const SymMat& a, const SymMat& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline SymMat sym_scale(double s, const SymMat& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double sym_frobenius_inner(const SymMat& a, const SymMat& b) {
    return a[0] * b[0] + a[1] * b[1] + 2.0 * a[2] * b[2];
}
inline double sym_frobenius_norm(const SymMat& a) {
    return std::sqrt(sym_frobenius_inner(a, a));
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
inline std::array<double, 2> sym_eigenvalues(const SymMat& m) {
    const double mean = 0.5 * (m[0] + m[1]);
    const double rad = std::hypot(0.5 * (m[0] - m[1]), m[2]);
    return {mean - rad, mean + rad};
}

/// Orthogonal projection onto {q symmetric : q_min I <= q <= q_max I},
/// by eigenvalue clipping. Near-scalar matrices are clamped on the
/// diagonal directly to avoid cancellation in the eigenvectors.
inline SymMat project_ad(const SymMat& m, double q_min, double q_max) {
    if (!(q_min < q_max)) throw std::invalid_argument("project_ad: requires q_min < q_max");
    if (!std::isfinite(m[0]) || !std::isfinite(m[1]) || !std::isfinite(m[2]))
        throw std::invalid_argument("project_ad: non-finite input");
    auto clamp = [&](double x) { return std::min(q_max, std::max(q_min, x)); };
    const double scale = std::abs(m[0]) + std::abs(m[1]) + std::abs(m[2]);
    if (std::abs(m[2]) + std::abs(m[0] - m[1]) < 1e-14 * scale || scale == 0.0)
        return {clamp(m[0]), clamp(m[1]), 0.0};
    const double mean = 0.5 * (m[0] + m[1]);
    const double half_diff = 0.5 * (m[0] - m[1]);
    const double rad = std::hypot(half_diff, m[2]);
    const double lo = clamp(mean - rad);
    const double hi = clamp(mean + rad);
    const double new_mean = 0.5 * (lo + hi);
    const double stretch = 0.5 * (hi - lo) / rad;
    return {new_mean + stretch * half_diff, new_mean - stretch * half_diff, stretch * m[2]};
}

/// General 2x2 input: Frobenius-orthogonal symmetrization first. The
/// control VI only tests symmetric directions, so the skew part is
/// invisible to the optimality system.
inline SymMat project_ad_general(double a11, double a12, double a21, double a22, double q_min,
                                 double q_max) {
    return project_ad({a11, a22, 0.5 * (a12 + a21)}, q_min, q_max);
}

/// One symmetric 2x2 matrix per triangle, with the spectral box bounds
/// carried alongside.
struct ControlField {
    std::vector<SymMat> elems;
    double q_min = 0.0;
    double q_max = 0.0;

    int size() const { return static_cast<int>(elems.size()); }
};

/// Per-triangle gradient matrices; carries the |T| weight so that
/// j'(q)(dq) = sum_T G_T : dq_T.
struct ControlGradient {
    std::vector<SymMat> elems;
    int size() const { return static_cast<int>(elems.size()); }
};

inline ControlField make_scalar_control(int num_triangles, double s, double q_min,
                                        double q_max) {
    ControlField q;
    q.q_min = q_min;
    q.q_max = q_max;
    q.elems.assign(num_triangles, SymMat{s, s, 0.0});
    return q;
}

inline bool control_is_feasible(const ControlField& q, double tol = 1e-12) {
    for (const auto& m : q.elems) {
        const auto ev = sym_eigenvalues(m);
        if (ev[0] < q.q_min - tol || ev[1] > q.q_max + tol) return false;
    }
    return true;
}

inline void validate_control(const ControlField& q, const Mesh& mesh) {
    if (q.size() != mesh.num_triangles())
        throw std::invalid_argument("control field size does not match mesh");
    for (const auto& m : q.elems)
        if (!std::isfinite(m[0]) || !std::isfinite(m[1]) || !std::isfinite(m[2]))
            throw std::invalid_argument("control field has non-finite entries");
}

inline ControlField project_control(const ControlField& q) {
    ControlField out = q;
    for (auto& m : out.elems) m = project_ad(m, q.q_min, q.q_max);
    return out;
}

/// L2 inner product of two matrix fields: sum_T |T| q1_T : q2_T.
inline double control_inner(const ControlField& q1, const ControlField& q2, const Mesh& mesh) {
    if (q1.size() != mesh.num_triangles() || q2.size() != mesh.num_triangles())
        throw std::invalid_argument("control_inner: mesh mismatch");
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        s += triangle_geometry(mesh, t).area * sym_frobenius_inner(q1.elems[t], q2.elems[t]);
    return s;
}

inline double control_norm(const ControlField& q, const Mesh& mesh) {
    return std::sqrt(control_inner(q, q, mesh));
}

inline double control_distance(const ControlField& a, const ControlField& b, const Mesh& mesh) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const SymMat d = sym_add(a.elems[t], sym_scale(-1.0, b.elems[t]));
        s += triangle_geometry(mesh, t).area * sym_frobenius_inner(d, d);
    }
    return std::sqrt(s);
}

/// Elementwise gradient of a P1 field on triangle t.
inline std::array<double, 2> element_gradient(const Mesh& mesh, const std::vector<double>& field,
                                              int t) {
    const auto g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    std::array<double, 2> grad = {0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        grad[0] += field[tri[k]] * g.grad[k][0];
        grad[1] += field[tri[k]] * g.grad[k][1];
    }
    return grad;
}

/// Symmetrized outer product sym(grad u (x) grad p) per triangle.
inline std::vector<SymMat> outer_product_field(const Mesh& mesh, const std::vector<double>& u,
                                               const std::vector<double>& p) {
    std::vector<SymMat> out(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto gu = element_gradient(mesh, u, t);
        const auto gp = element_gradient(mesh, p, t);
        out[t] = {gu[0] * gp[0], gu[1] * gp[1], 0.5 * (gu[0] * gp[1] + gu[1] * gp[0])};
    }
    return out;
}

/// Unweighted gradient density alpha q_T - sym(grad u (x) grad p)_T.
inline std::vector<SymMat> gradient_density(const Mesh& mesh, const ControlField& q,
                                            const std::vector<double>& u,
                                            const std::vector<double>& p, double alpha) {
    std::vector<SymMat> g = outer_product_field(mesh, u, p);
    for (int t = 0; t < mesh.num_triangles(); ++t)
        g[t] = sym_add(sym_scale(alpha, q.elems[t]), sym_scale(-1.0, g[t]));
    return g;
}

/// Reduced gradient with the |T| weight: G_T = |T| (alpha q_T - sym(grad u (x) grad p)_T).
inline ControlGradient reduced_gradient(const Mesh& mesh, const ControlField& q,
                                        const std::vector<double>& u,
                                        const std::vector<double>& p, double alpha) {
    ControlGradient G;
    G.elems = gradient_density(mesh, q, u, p, alpha);
    for (int t = 0; t < mesh.num_triangles(); ++t)
        G.elems[t] = sym_scale(triangle_geometry(mesh, t).area, G.elems[t]);
    return G;
}

inline double gradient_pairing(const ControlGradient& G, const ControlField& d) {
    double s = 0.0;
    for (int t = 0; t < G.size(); ++t) s += sym_frobenius_inner(G.elems[t], d.elems[t]);
    return s;
}

/// Projected-gradient stationarity measure with reference step 1 on the
/// unweighted density: || q - P_ad(q - (alpha q - sym(grad u (x) grad p))) ||_{L2}.
/// Zero iff the discrete control VI holds.
inline double vi_residual(const Mesh& mesh, const ControlField& q, const ControlGradient& G) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = triangle_geometry(mesh, t).area;
        const SymMat density = sym_scale(1.0 / area, G.elems[t]);
        const SymMat trial = sym_add(q.elems[t], sym_scale(-1.0, density));
        const SymMat proj = project_ad(trial, q.q_min, q.q_max);
        const SymMat diff = sym_add(q.elems[t], sym_scale(-1.0, proj));
        s += area * sym_frobenius_inner(diff, diff);
    }
    return std::sqrt(s);
}

/// || q - P_ad((1/alpha) sym(grad u (x) grad p)) ||_{L2}, the residual of
/// the projection characterization of stationary controls.
inline double fixed_point_residual(const Mesh& mesh, const ControlField& q,
                                   const std::vector<SymMat>& outer, double alpha) {
    double s = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const SymMat proj = project_ad(sym_scale(1.0 / alpha, outer[t]), q.q_min, q.q_max);
        const SymMat diff = sym_add(q.elems[t], sym_scale(-1.0, proj));
        s += triangle_geometry(mesh, t).area * sym_frobenius_inner(diff, diff);
    }
    return std::sqrt(s);
}

}  // namespace occ
