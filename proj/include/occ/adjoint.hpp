#pragma once

#include <cmath>
#include <vector>

#include "occ/control.hpp"
#include "occ/fem.hpp"
#include "occ/smoothed_max.hpp"
#include "occ/state.hpp"

namespace occ {

/// Adjoint equation (q grad p, grad v) + (dr/du p, v) = (u - u_d, v).
/// Same operator as the final Newton step of the state solve.
inline std::vector<double> solve_adjoint(const ObstacleProblem& prob, const ControlField& q,
                                         const std::vector<double>& u, const SmoothedMax& m,
                                         double lin_tol = 1e-10) {
    const Mesh& mesh = *prob.mesh;
    SparseOperator A = assemble_stiffness(mesh, q);
    const std::vector<double> mL = lumped_mass(mesh);
    for (int i = 0; i < A.n; ++i) {
        if (A.is_constrained(i)) continue;
        const auto pen = m.penalty(prob.psi, u[i]);
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (A.col[k] == i) A.val[k] += mL[i] * pen.dr_du;
    }
    const SparseOperator M = assemble_mass(mesh);
    std::vector<double> diff(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) diff[i] = u[i] - prob.u_d[i];
    std::vector<double> rhs;
    M.mult_raw(diff, rhs);
    for (int i : mesh.boundary_nodes) rhs[i] = 0.0;
    SolveOptions lin;
    lin.lin_tol = lin_tol;
    return solve_spd(A, rhs, lin);
}

struct Multipliers {
    std::vector<double> lambda;  // gamma * max_gamma(psi - u) >= 0 nodally
    std::vector<double> mu;      // dr/du * p
};

inline Multipliers multipliers(const ObstacleProblem& prob, const std::vector<double>& u,
                               const std::vector<double>& p, const SmoothedMax& m) {
    const int nn = prob.mesh->num_nodes();
    Multipliers out;
    out.lambda.resize(nn);
    out.mu.resize(nn);
    for (int i = 0; i < nn; ++i) {
        const auto pen = m.penalty(prob.psi, u[i]);
        out.lambda[i] = -pen.r;          // sign flip: lambda := -r >= 0
        out.mu[i] = pen.dr_du * p[i];
    }
    return out;
}

/// Objective J(q, u) = 1/2 ||u - u_d||^2 + alpha/2 ||q||^2.
inline double objective(const ObstacleProblem& prob, const ControlField& q,
                        const std::vector<double>& u) {
    const Mesh& mesh = *prob.mesh;
    const SparseOperator M = assemble_mass(mesh);
    std::vector<double> diff(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) diff[i] = u[i] - prob.u_d[i];
    const double tracking = mass_inner(M, diff, diff);
    const double qn = control_norm(q, mesh);
    return 0.5 * tracking + 0.5 * prob.alpha * qn * qn;
}

/// Residuals and bound checks for one (gamma, q, u, p, lambda, mu)
/// snapshot. All entries raw; pass/fail thresholds live in the
/// verification harness.
struct KKTReport {
    double gamma = 0.0;
    double J = 0.0;
    double comp_state = 0.0;       // |(lambda, psi - u)|
    double comp_adjoint = 0.0;     // |(lambda, |p|)|
    double comp_mu = 0.0;          // |(mu, u - psi)|
    double control_fixed_point_residual = 0.0;
    double vi_residual = 0.0;
    double mu_L1 = 0.0;
    double u_minus_ud_L1 = 0.0;
    double lambda_min_nodal = 0.0;
    double p_H1_semi = 0.0;
    StateSolveReport state;
};

inline KKTReport kkt_report(const ObstacleProblem& prob, const ControlField& q,
                            const std::vector<double>& u, const std::vector<double>& p,
                            const std::vector<double>& lambda, const std::vector<double>& mu,
                            const SmoothedMax& m, const StateSolveReport& state_report) {
    const Mesh& mesh = *prob.mesh;
    const int nn = mesh.num_nodes();
    const SparseOperator M = assemble_mass(mesh);

    std::vector<double> psi_minus_u(nn), u_minus_psi(nn), abs_p(nn), u_minus_ud(nn);
    for (int i = 0; i < nn; ++i) {
        psi_minus_u[i] = prob.psi - u[i];
        u_minus_psi[i] = u[i] - prob.psi;
        abs_p[i] = std::abs(p[i]);
        u_minus_ud[i] = u[i] - prob.u_d[i];
    }

    KKTReport rep;
    rep.gamma = m.gamma();
    rep.J = objective(prob, q, u);
    rep.comp_state = std::abs(mass_inner(M, lambda, psi_minus_u));
    rep.comp_adjoint = std::abs(mass_inner(M, lambda, abs_p));
    rep.comp_mu = std::abs(mass_inner(M, mu, u_minus_psi));
    const auto outer = outer_product_field(mesh, u, p);
    rep.control_fixed_point_residual = fixed_point_residual(mesh, q, outer, prob.alpha);
    rep.vi_residual = occ::vi_residual(mesh, q, reduced_gradient(mesh, q, u, p, prob.alpha));
    rep.mu_L1 = integrate_abs_pow(mesh, mu, 1.0);
    rep.u_minus_ud_L1 = integrate_abs_pow(mesh, u_minus_ud, 1.0);
    rep.lambda_min_nodal = lambda.empty() ? 0.0 : *std::min_element(lambda.begin(), lambda.end());
    rep.p_H1_semi = norms(p, mesh).H1_semi;
    rep.state = state_report;
    return rep;
}

struct MuBoundCheck {
    double mu_L1 = 0.0;
    double bound_rhs = 0.0;  // ||u - u_d||_{L1}
    bool satisfied = false;
};

/// ||mu||_{L1} <= C_mu ||u - u_d||_{L1}; the continuous estimate holds
/// with constant 1, C_mu leaves discretization slack.
inline MuBoundCheck mu_l1_bound_check(const std::vector<double>& mu,
                                      const std::vector<double>& u,
                                      const std::vector<double>& u_d, const Mesh& mesh,
                                      double C_mu = 10.0) {
    MuBoundCheck out;
    out.mu_L1 = integrate_abs_pow(mesh, mu, 1.0);
    std::vector<double> diff(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) diff[i] = u[i] - u_d[i];
    out.bound_rhs = integrate_abs_pow(mesh, diff, 1.0);
    out.satisfied = out.mu_L1 <= C_mu * out.bound_rhs;
    return out;
}

}  // namespace occ
