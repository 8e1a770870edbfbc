#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "occ/control.hpp"
#include "occ/fem.hpp"
#include "occ/mesh.hpp"
#include "occ/smoothed_max.hpp"
#include "occ/sparse.hpp"

namespace occ {

/// Problem data for the obstacle control problem on one mesh. The
/// admissible state set is represented implicitly by u >= psi.
struct ObstacleProblem {
    const Mesh* mesh = nullptr;
    double psi = -1.0;          // constant obstacle, psi < 0
    std::vector<double> f;      // nodal load data
    double q_min = 0.5;
    double q_max = 2.0;
    double alpha = 1e-3;        // Tikhonov weight
    std::vector<double> u_d;    // desired state (no boundary-zero constraint)

    void validate() const {
        if (!mesh) throw std::invalid_argument("ObstacleProblem: missing mesh");
        if (!(psi < 0.0)) throw std::invalid_argument("psi must be negative");
        if (!(q_min > 0.0 && q_min < q_max))
            throw std::invalid_argument("bounds must satisfy 0 < q_min < q_max");
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (static_cast<int>(f.size()) != mesh->num_nodes() ||
            static_cast<int>(u_d.size()) != mesh->num_nodes())
            throw std::invalid_argument("f and u_d must be nodal fields on the mesh");
    }
};

inline ObstacleProblem make_problem(const Mesh& mesh, double psi, double f_const, double q_min,
                                    double q_max, double alpha, double u_d_const) {
    ObstacleProblem prob;
    prob.mesh = &mesh;
    prob.psi = psi;
    prob.f.assign(mesh.num_nodes(), f_const);
    prob.q_min = q_min;
    prob.q_max = q_max;
    prob.alpha = alpha;
    prob.u_d.assign(mesh.num_nodes(), u_d_const);
    prob.validate();
    return prob;
}

struct StateSolveReport {
    int newton_iterations = 0;
    double final_residual_norm = 0.0;
    int damping_events = 0;
    double r_norm_L2 = 0.0;     // ||r(gamma; u)||_{L2}
    double div_norm_L2 = 0.0;   // discrete ||div(q grad u)|| surrogate, ||f - r||_{L2}
    double feas_Linf = 0.0;     // ||max(psi - u, 0)||_inf
    double feas_grad_L2 = 0.0;  // ||grad max(psi - u, 0)||
    std::vector<double> residual_history;
};

struct NewtonOptions {
    double newton_tol = 1e-10;  // absolute, interior residual
    int max_iters = 50;
    int max_halvings = 30;
    double lin_tol = 1e-10;
};

struct NewtonFailure : std::runtime_error {
    std::vector<double> residual_history;
    NewtonFailure(const std::string& msg, std::vector<double> hist)
        : std::runtime_error(msg), residual_history(std::move(hist)) {}
};

struct FeasibilityDiagnostics {
    double feas_Linf = 0.0;
    double feas_grad_L2 = 0.0;
    double feas_Ls = 0.0;
};

/// Norms of the P1 interpolant of max(psi - u, 0).
inline FeasibilityDiagnostics feasibility_diagnostics(const std::vector<double>& u,
                                                      const ObstacleProblem& prob,
                                                      double s = 2.0) {
    const Mesh& mesh = *prob.mesh;
    std::vector<double> viol(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) viol[i] = std::max(prob.psi - u[i], 0.0);
    const NormSet n = norms(viol, mesh, s);
    return {n.Linf, n.H1_semi, n.Ls};
}

namespace detail {

// Interior residual of the discrete state equation
//   A(q) u + diag(mL) r(gamma; u) = M f.
// The penalty term uses the lumped mass so that the Newton matrix
// A + diag(mL dr/du) is the exact (and SPD) linearization; the adjoint
// then matches the discrete gradient exactly.
inline std::vector<double> state_residual(const SparseOperator& A, const std::vector<double>& mL,
                                          const std::vector<double>& Mf, const Mesh& mesh,
                                          const SmoothedMax& m, double psi,
                                          const std::vector<double>& u) {
    std::vector<double> res(mesh.num_nodes(), 0.0), Au;
    A.mult(u, Au);
    for (int i : mesh.interior_nodes) {
        const auto pen = m.penalty(psi, u[i]);
        res[i] = Au[i] + mL[i] * pen.r - Mf[i];
    }
    return res;
}

}  // namespace detail

/// Damped Newton for the regularized state equation
///   -div(q grad u) + r(gamma; u) = f,  u = 0 on the boundary.
/// The semilinear term is monotone, so every Newton matrix is SPD.
inline std::pair<std::vector<double>, StateSolveReport> solve_regularized_state(
    const ObstacleProblem& prob, const ControlField& q, const SmoothedMax& m,
    const std::vector<double>& initial_guess, const NewtonOptions& opts = {}) {
    prob.validate();
    const Mesh& mesh = *prob.mesh;
    validate_control(q, mesh);
    if (!control_is_feasible(q, 1e-10))
        throw std::invalid_argument("solve_regularized_state: control not in Q_ad");

    const SparseOperator A = assemble_stiffness(mesh, q);
    const SparseOperator M = assemble_mass(mesh);
    const std::vector<double> mL = lumped_mass(mesh);
    std::vector<double> Mf;
    M.mult_raw(prob.f, Mf);

    std::vector<double> u = initial_guess;
    if (static_cast<int>(u.size()) != mesh.num_nodes())
        throw std::invalid_argument("initial guess size does not match mesh");
    for (int i : mesh.boundary_nodes) u[i] = 0.0;

    StateSolveReport report;
    std::vector<double> res = detail::state_residual(A, mL, Mf, mesh, m, prob.psi, u);
    double resnorm = norm2(res);
    report.residual_history.push_back(resnorm);

    for (int it = 0; it < opts.max_iters && resnorm > opts.newton_tol; ++it) {
        // Newton matrix A + diag(mL * dr/du), reassembled per step.
        SparseOperator J = A;
        for (int i = 0; i < J.n; ++i) {
            if (J.is_constrained(i)) continue;
            const auto pen = m.penalty(prob.psi, u[i]);
            for (int k = J.row_ptr[i]; k < J.row_ptr[i + 1]; ++k)
                if (J.col[k] == i) J.val[k] += mL[i] * pen.dr_du;
        }
        std::vector<double> rhs(mesh.num_nodes(), 0.0);
        for (int i : mesh.interior_nodes) rhs[i] = -res[i];
        SolveOptions lin;
        lin.lin_tol = opts.lin_tol;
        const std::vector<double> step = solve_spd(J, rhs, lin);

        // Residual-norm line search by halving.
        double s = 1.0;
        std::vector<double> u_trial(mesh.num_nodes());
        double trial_norm = 0.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            for (int i = 0; i < mesh.num_nodes(); ++i) u_trial[i] = u[i] + s * step[i];
            const std::vector<double> trial_res =
                detail::state_residual(A, mL, Mf, mesh, m, prob.psi, u_trial);
            trial_norm = norm2(trial_res);
            if (trial_norm < resnorm) {
                if (h > 0) ++report.damping_events;
                u = u_trial;
                res = trial_res;
                resnorm = trial_norm;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        ++report.newton_iterations;
        report.residual_history.push_back(resnorm);
        if (!accepted)
            throw NewtonFailure("solve_regularized_state: line search failed to decrease residual",
                                report.residual_history);
    }
    if (resnorm > opts.newton_tol)
        throw NewtonFailure("solve_regularized_state: Newton iteration cap exceeded",
                            report.residual_history);
    report.final_residual_norm = resnorm;

    // Diagnostics: consistent-mass norms of the nodal interpolants.
    std::vector<double> r_nodal(mesh.num_nodes()), f_minus_r(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        r_nodal[i] = m.penalty(prob.psi, u[i]).r;
        f_minus_r[i] = prob.f[i] - r_nodal[i];
    }
    report.r_norm_L2 = std::sqrt(std::max(0.0, mass_inner(M, r_nodal, r_nodal)));
    report.div_norm_L2 = std::sqrt(std::max(0.0, mass_inner(M, f_minus_r, f_minus_r)));
    const FeasibilityDiagnostics fd = feasibility_diagnostics(u, prob);
    report.feas_Linf = fd.feas_Linf;
    report.feas_grad_L2 = fd.feas_grad_L2;
    return {u, report};
}

struct PdasOptions {
    int max_iters = 200;
    double lin_tol = 1e-12;
    double active_set_c = 1.0;
};

struct PdasFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Primal-dual active set oracle for the unregularized discrete obstacle
/// problem: A(q) u = M f + lambda, u >= psi, lambda >= 0 nodally, with
/// exact nodal complementarity at termination.
inline std::pair<std::vector<double>, std::vector<double>> solve_obstacle_pdas(
    const ObstacleProblem& prob, const ControlField& q, const PdasOptions& opts = {}) {
    prob.validate();
    const Mesh& mesh = *prob.mesh;
    validate_control(q, mesh);
    if (!control_is_feasible(q, 1e-10))
        throw std::invalid_argument("solve_obstacle_pdas: control not in Q_ad");

    const SparseOperator A = assemble_stiffness(mesh, q);
    const SparseOperator M = assemble_mass(mesh);
    std::vector<double> Mf;
    M.mult_raw(prob.f, Mf);

    const int nn = mesh.num_nodes();
    std::vector<std::uint8_t> active(nn, 0), prev_active;
    std::vector<double> u(nn, 0.0), lambda(nn, 0.0);

    for (int it = 0; it < opts.max_iters; ++it) {
        // Solve with u = psi imposed on the active set.
        SparseOperator Ac = A;
        Ac.constrained = mesh.on_boundary;
        std::vector<double> fixed(nn, 0.0);
        for (int i : mesh.interior_nodes) {
            if (active[i]) {
                Ac.constrained[i] = 1;
                fixed[i] = prob.psi;
            }
        }
        // Fold the coupling to fixed values into the right-hand side.
        std::vector<double> Afix;
        A.mult_raw(fixed, Afix);
        std::vector<double> rhs(nn, 0.0);
        for (int i = 0; i < nn; ++i) {
            if (Ac.is_constrained(i))
                rhs[i] = fixed[i];
            else
                rhs[i] = Mf[i] - Afix[i];
        }
        SolveOptions lin;
        lin.lin_tol = opts.lin_tol;
        u = solve_spd(Ac, rhs, lin, &fixed);
        for (int i : mesh.boundary_nodes) u[i] = 0.0;
        for (int i : mesh.interior_nodes)
            if (active[i]) u[i] = prob.psi;

        // Nodal algebraic multiplier: lambda = A u - M f, zeroed on the
        // inactive set so complementarity is exact.
        std::vector<double> Au;
        A.mult_raw(u, Au);
        lambda.assign(nn, 0.0);
        for (int i : mesh.interior_nodes)
            if (active[i]) lambda[i] = Au[i] - Mf[i];

        prev_active = active;
        for (int i : mesh.interior_nodes) {
            const double residual_lambda = active[i] ? lambda[i] : 0.0;
            double indicator;
            if (active[i])
                indicator = residual_lambda + opts.active_set_c * (prob.psi - u[i]);
            else {
                // For inactive nodes the predictor uses the violation only.
                indicator = opts.active_set_c * (prob.psi - u[i]);
            }
            active[i] = indicator > 0.0 ? 1 : 0;
        }
        if (active == prev_active) return {u, lambda};
    }
    throw PdasFailure("solve_obstacle_pdas: active set did not settle within iteration cap");
}

}  // namespace occ
