#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "occ/control.hpp"
#include "occ/mesh.hpp"
#include "occ/sparse.hpp"

namespace occ {

/// Stiffness matrix for the form (q grad u, grad v) with a piecewise
/// constant matrix coefficient. If `apply_mask` is set, boundary rows
/// and columns are eliminated (homogeneous Dirichlet).
inline SparseOperator assemble_stiffness(const Mesh& mesh, const ControlField& q,
                                         bool apply_mask = true) {
    validate_control(q, mesh);
    TripletAccumulator acc(mesh.num_nodes());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = triangle_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        const SymMat& m = q.elems[t];
        for (int a = 0; a < 3; ++a) {
            // (q grad phi_a) is constant on the element
            const double qg0 = m[0] * g.grad[a][0] + m[2] * g.grad[a][1];
            const double qg1 = m[2] * g.grad[a][0] + m[1] * g.grad[a][1];
            for (int b = 0; b < 3; ++b) {
                const double v = g.area * (qg0 * g.grad[b][0] + qg1 * g.grad[b][1]);
                acc.add(tri[a], tri[b], v);
            }
        }
    }
    SparseOperator A = acc.compress();
    if (apply_mask) A.constrained = mesh.on_boundary;
    return A;
}

inline SparseOperator assemble_laplace(const Mesh& mesh, bool apply_mask = true) {
    return assemble_stiffness(mesh, make_scalar_control(mesh.num_triangles(), 1.0, 0.5, 2.0),
                              apply_mask);
}

/// Consistent P1 mass matrix; element block |T|/12 [[2,1,1],[1,2,1],[1,1,2]].
inline SparseOperator assemble_mass(const Mesh& mesh, bool apply_mask = false) {
    TripletAccumulator acc(mesh.num_nodes());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = triangle_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                acc.add(tri[a], tri[b], g.area / 12.0 * (a == b ? 2.0 : 1.0));
    }
    SparseOperator M = acc.compress();
    if (apply_mask) M.constrained = mesh.on_boundary;
    return M;
}

/// Row sums of the consistent mass matrix (lumped mass).
inline std::vector<double> lumped_mass(const Mesh& mesh) {
    std::vector<double> m(mesh.num_nodes(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = triangle_geometry(mesh, t);
        for (int k = 0; k < 3; ++k) m[mesh.triangles[t][k]] += g.area / 3.0;
    }
    return m;
}

inline double mass_inner(const SparseOperator& M, const std::vector<double>& a,
                         const std::vector<double>& b) {
    std::vector<double> Mb;
    M.mult_raw(b, Mb);
    return dot(a, Mb);
}

// 7-point Gauss quadrature on the reference triangle, degree 5.
struct TriQuadPoint {
    double l0, l1, l2, w;
};
inline const std::array<TriQuadPoint, 7>& triangle_quadrature() {
    static const double a = (6.0 + std::sqrt(15.0)) / 21.0;
    static const double b = (6.0 - std::sqrt(15.0)) / 21.0;
    static const double wa = (155.0 + std::sqrt(15.0)) / 1200.0;
    static const double wb = (155.0 - std::sqrt(15.0)) / 1200.0;
    static const std::array<TriQuadPoint, 7> pts = {{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40},
                                                     {a, a, 1 - 2 * a, wa},
                                                     {a, 1 - 2 * a, a, wa},
                                                     {1 - 2 * a, a, a, wa},
                                                     {b, b, 1 - 2 * b, wb},
                                                     {b, 1 - 2 * b, b, wb},
                                                     {1 - 2 * b, b, b, wb}}};
    return pts;
}

/// int_Omega |v_h|^s by elementwise quadrature of the P1 interpolant.
inline double integrate_abs_pow(const Mesh& mesh, const std::vector<double>& field, double s) {
    double total = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = triangle_geometry(mesh, t);
        const auto& tri = mesh.triangles[t];
        double elem = 0.0;
        for (const auto& qp : triangle_quadrature()) {
            const double v =
                qp.l0 * field[tri[0]] + qp.l1 * field[tri[1]] + qp.l2 * field[tri[2]];
            elem += qp.w * std::pow(std::abs(v), s);
        }
        total += g.area * elem;
    }
    return total;
}

struct NormSet {
    double L2 = 0.0;
    double H1_semi = 0.0;
    double Linf = 0.0;
    double L1 = 0.0;
    double Ls = 0.0;
};

/// Discrete norms of a nodal field: L2 via the mass matrix, H1 seminorm
/// via the unit-coefficient stiffness, L^s by quadrature of the P1
/// interpolant, Linf over nodal values.
inline NormSet norms(const std::vector<double>& field, const Mesh& mesh, double s = 2.0) {
    if (s < 1.0) throw std::invalid_argument("norms: s must be >= 1");
    if (static_cast<int>(field.size()) != mesh.num_nodes())
        throw std::invalid_argument("norms: field size does not match mesh");
    NormSet out;
    const SparseOperator M = assemble_mass(mesh);
    const SparseOperator L = assemble_laplace(mesh, /*apply_mask=*/false);
    out.L2 = std::sqrt(std::max(0.0, mass_inner(M, field, field)));
    std::vector<double> Lf;
    L.mult_raw(field, Lf);
    out.H1_semi = std::sqrt(std::max(0.0, dot(field, Lf)));
    for (double v : field) out.Linf = std::max(out.Linf, std::abs(v));
    out.L1 = integrate_abs_pow(mesh, field, 1.0);
    if (std::isinf(s))
        out.Ls = out.Linf;
    else
        out.Ls = std::pow(integrate_abs_pow(mesh, field, s), 1.0 / s);
    return out;
}

}  // namespace occ
