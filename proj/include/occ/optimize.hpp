#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "occ/adjoint.hpp"
#include "occ/control.hpp"
#include "occ/state.hpp"

namespace occ {

struct PathConfig {
    std::vector<double> gamma_ladder;  // strictly increasing, all > 0
    int pg_max_iters = 400;
    double pg_tol = 1e-7;        // stationarity (vi_residual)
    double fp_tol = 1e-6;        // projection fixed-point residual
    double armijo_c = 1e-4;
    double armijo_backtrack = 0.5;
    double armijo_s_init = 1.0;
    int max_backtracks = 40;
    bool fd_check_enabled = false;
    std::uint64_t seed = 42;
    NewtonOptions newton;

    void validate() const {
        if (gamma_ladder.empty()) throw std::invalid_argument("gamma ladder is empty");
        double prev = 0.0;
        for (double g : gamma_ladder) {
            if (!(g > prev))
                throw std::invalid_argument("gamma ladder must be strictly increasing and positive");
            prev = g;
        }
    }
};

/// 10^1, 10^1.5, ..., 10^4.
inline std::vector<double> default_gamma_ladder() {
    std::vector<double> ladder;
    for (int k = 2; k <= 8; ++k) ladder.push_back(std::pow(10.0, 0.5 * k));
    return ladder;
}

struct FixedGammaResult {
    ControlField q;
    std::vector<double> u, p;
    KKTReport kkt;
    int pg_iterations = 0;
    bool converged = false;
    int total_newton_iterations = 0;
};

namespace detail {

/// Solves the state at q (warm started) and returns the objective.
inline double objective_at(const ObstacleProblem& prob, const SmoothedMax& m,
                           const ControlField& q, std::vector<double>& u_warm,
                           const NewtonOptions& opts, int* newton_count = nullptr,
                           StateSolveReport* report_out = nullptr) {
    auto [u, report] = solve_regularized_state(prob, q, m, u_warm, opts);
    u_warm = u;
    if (newton_count) *newton_count += report.newton_iterations;
    if (report_out) *report_out = report;
    return objective(prob, q, u);
}

}  // namespace detail

/// Minimizes the regularized reduced objective over Q_ad for one gamma.
/// The search direction is the projection fixed-point step
/// q <- P_ad((1/alpha) sym(grad u (x) grad p)), which equals a projected
/// gradient step of length 1/alpha; it is damped by Armijo backtracking
/// on the segment, and a plain projected-gradient arc with s_init is the
/// fallback, so the recorded objective sequence is nonincreasing.
inline FixedGammaResult optimize_fixed_gamma(const ObstacleProblem& prob, const SmoothedMax& m,
                                             const ControlField& q0, const PathConfig& cfg,
                                             const std::vector<double>* u_warm_start = nullptr) {
    prob.validate();
    const Mesh& mesh = *prob.mesh;
    if (!control_is_feasible(q0, 1e-10))
        throw std::invalid_argument("optimize_fixed_gamma: q0 not in Q_ad");

    FixedGammaResult out;
    out.q = q0;
    out.u = u_warm_start ? *u_warm_start : std::vector<double>(mesh.num_nodes(), 0.0);

    StateSolveReport state_report;
    double J = detail::objective_at(prob, m, out.q, out.u, cfg.newton,
                                    &out.total_newton_iterations, &state_report);

    for (int it = 0; it < cfg.pg_max_iters; ++it) {
        out.p = solve_adjoint(prob, out.q, out.u, m, cfg.newton.lin_tol);
        const auto outer = outer_product_field(mesh, out.u, out.p);
        const auto gdens = gradient_density(mesh, out.q, out.u, out.p, prob.alpha);

        ControlGradient G;
        G.elems.resize(mesh.num_triangles());
        for (int t = 0; t < mesh.num_triangles(); ++t)
            G.elems[t] = sym_scale(triangle_geometry(mesh, t).area, gdens[t]);
        const double vi_res = vi_residual(mesh, out.q, G);
        const double fp_res = fixed_point_residual(mesh, out.q, outer, prob.alpha);
        if (vi_res <= cfg.pg_tol && fp_res <= cfg.fp_tol) {
            out.converged = true;
            break;
        }

        // Fixed-point target and the induced descent direction.
        ControlField q_fp = out.q;
        for (int t = 0; t < mesh.num_triangles(); ++t)
            q_fp.elems[t] = project_ad(sym_scale(1.0 / prob.alpha, outer[t]), q0.q_min, q0.q_max);
        double dir_slope = 0.0;  // <grad j, q_fp - q>
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            const SymMat d = sym_add(q_fp.elems[t], sym_scale(-1.0, out.q.elems[t]));
            dir_slope += sym_frobenius_inner(G.elems[t], d);
        }

        bool accepted = false;
        if (dir_slope < 0.0) {
            double theta = 1.0;
            for (int h = 0; h < cfg.max_backtracks; ++h) {
                ControlField q_trial = out.q;
                for (int t = 0; t < mesh.num_triangles(); ++t)
                    q_trial.elems[t] =
                        sym_add(sym_scale(1.0 - theta, out.q.elems[t]),
                                sym_scale(theta, q_fp.elems[t]));
                std::vector<double> u_trial = out.u;
                StateSolveReport trial_report;
                const double J_trial =
                    detail::objective_at(prob, m, q_trial, u_trial, cfg.newton,
                                         &out.total_newton_iterations, &trial_report);
                if (J_trial <= J + cfg.armijo_c * theta * dir_slope) {
                    out.q = q_trial;
                    out.u = u_trial;
                    state_report = trial_report;
                    J = J_trial;
                    accepted = true;
                    break;
                }
                theta *= cfg.armijo_backtrack;
            }
        }
        if (!accepted) {
            // Projected-gradient arc fallback.
            double s = cfg.armijo_s_init;
            for (int h = 0; h < cfg.max_backtracks; ++h) {
                ControlField q_trial = out.q;
                for (int t = 0; t < mesh.num_triangles(); ++t)
                    q_trial.elems[t] = project_ad(
                        sym_add(out.q.elems[t], sym_scale(-s, gdens[t])), q0.q_min, q0.q_max);
                double slope = 0.0;
                for (int t = 0; t < mesh.num_triangles(); ++t) {
                    const SymMat d = sym_add(q_trial.elems[t], sym_scale(-1.0, out.q.elems[t]));
                    slope += sym_frobenius_inner(G.elems[t], d);
                }
                if (slope >= 0.0) break;  // stationary up to rounding
                std::vector<double> u_trial = out.u;
                StateSolveReport trial_report;
                const double J_trial =
                    detail::objective_at(prob, m, q_trial, u_trial, cfg.newton,
                                         &out.total_newton_iterations, &trial_report);
                if (J_trial <= J + cfg.armijo_c * slope) {
                    out.q = q_trial;
                    out.u = u_trial;
                    state_report = trial_report;
                    J = J_trial;
                    accepted = true;
                    break;
                }
                s *= cfg.armijo_backtrack;
            }
        }
        ++out.pg_iterations;
        if (!accepted) break;  // no further progress possible
    }

    out.p = solve_adjoint(prob, out.q, out.u, m, cfg.newton.lin_tol);
    const Multipliers mult = multipliers(prob, out.u, out.p, m);
    out.kkt = kkt_report(prob, out.q, out.u, out.p, mult.lambda, mult.mu, m, state_report);
    return out;
}

struct PathRecord {
    double gamma = 0.0;
    ControlField q;
    std::vector<double> u, p;
    KKTReport kkt;
    int pg_iterations = 0;
    bool converged = false;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least-squares slope of log(values) vs log(gammas) over the window
/// where values exceed `floor` (solver tolerances saturate below it).
inline double fit_rate(const std::vector<double>& gammas, const std::vector<double>& values,
                       double floor = 0.0) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < gammas.size() && i < values.size(); ++i) {
        if (values[i] > floor && gammas[i] > 0.0) {
            lx.push_back(std::log(gammas[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < 3)
        throw InsufficientData("fit_rate: fewer than 3 usable points");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct PathSlopes {
    double slope_feas_Linf = 0.0;
    double slope_feas_grad = 0.0;
    double slope_comp_state = 0.0;
};

/// Warm-started sequence of fixed-gamma solves across the ladder, the
/// computational surrogate for gamma -> infinity.
inline std::vector<PathRecord> run_path(const ObstacleProblem& prob, const ControlField& q0,
                                        const PathConfig& cfg) {
    cfg.validate();
    std::vector<PathRecord> records;
    ControlField q = q0;
    std::vector<double> u(prob.mesh->num_nodes(), 0.0);
    for (double gamma : cfg.gamma_ladder) {
        const SmoothedMax m(gamma);
        FixedGammaResult res = optimize_fixed_gamma(prob, m, q, cfg, &u);
        PathRecord rec;
        rec.gamma = gamma;
        rec.q = res.q;
        rec.u = res.u;
        rec.p = res.p;
        rec.kkt = res.kkt;
        rec.pg_iterations = res.pg_iterations;
        rec.converged = res.converged;
        records.push_back(std::move(rec));
        q = records.back().q;
        u = records.back().u;
    }
    return records;
}

inline double saturation_floor(const NewtonOptions& opts) {
    return std::max(10.0 * opts.newton_tol, 10.0 * opts.lin_tol);
}

inline PathSlopes fit_path_slopes(const std::vector<PathRecord>& records,
                                  const NewtonOptions& opts) {
    std::vector<double> gammas, feas_inf, feas_grad, comp_state;
    for (const auto& r : records) {
        gammas.push_back(r.gamma);
        feas_inf.push_back(r.kkt.state.feas_Linf);
        feas_grad.push_back(r.kkt.state.feas_grad_L2);
        comp_state.push_back(r.kkt.comp_state);
    }
    const double floor = saturation_floor(opts);
    PathSlopes s;
    s.slope_feas_Linf = fit_rate(gammas, feas_inf, floor);
    s.slope_feas_grad = fit_rate(gammas, feas_grad, floor);
    s.slope_comp_state = fit_rate(gammas, comp_state, floor);
    return s;
}

/// Fixed-control ladder of state solves (no optimization), used for the
/// bound and rate diagnostics at a pinned q.
struct FixedControlRecord {
    double gamma = 0.0;
    std::vector<double> u;
    StateSolveReport report;
};

inline std::vector<FixedControlRecord> solve_state_ladder(const ObstacleProblem& prob,
                                                          const ControlField& q,
                                                          const std::vector<double>& ladder,
                                                          const NewtonOptions& opts = {}) {
    std::vector<FixedControlRecord> records;
    std::vector<double> u(prob.mesh->num_nodes(), 0.0);
    for (double gamma : ladder) {
        const SmoothedMax m(gamma);
        auto [u_next, report] = solve_regularized_state(prob, q, m, u, opts);
        u = u_next;
        records.push_back({gamma, u, report});
    }
    return records;
}

struct FdCheckRow {
    double h = 0.0;
    double fd_value = 0.0;
    double rel_error = 0.0;
};

struct FdCheckResult {
    double analytic = 0.0;
    double best_rel_error = 0.0;
    bool degenerate = false;  // both sides vanish
    std::vector<FdCheckRow> table;
};

/// Central finite differences of the reduced objective along a feasible
/// direction vs the assembled gradient pairing.
inline FdCheckResult fd_gradient_check(const ObstacleProblem& prob, const SmoothedMax& m,
                                       const ControlField& q, const ControlField& direction,
                                       const std::vector<double>& h_values,
                                       const NewtonOptions& opts = {}) {
    prob.validate();
    const Mesh& mesh = *prob.mesh;
    double h_max = 0.0;
    for (double h : h_values) h_max = std::max(h_max, h);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (double sign : {1.0, -1.0}) {
            const SymMat pert =
                sym_add(q.elems[t], sym_scale(sign * h_max, direction.elems[t]));
            const auto ev = sym_eigenvalues(pert);
            if (ev[0] < q.q_min - 1e-12 || ev[1] > q.q_max + 1e-12)
                throw std::invalid_argument(
                    "fd_gradient_check: perturbation leaves Q_ad (element " + std::to_string(t) +
                    ")");
        }
    }

    std::vector<double> u = std::vector<double>(mesh.num_nodes(), 0.0);
    auto [u0, rep0] = solve_regularized_state(prob, q, m, u, opts);
    const std::vector<double> p = solve_adjoint(prob, q, u0, m, opts.lin_tol);
    const ControlGradient G = reduced_gradient(mesh, q, u0, p, prob.alpha);

    FdCheckResult out;
    out.analytic = gradient_pairing(G, direction);
    out.best_rel_error = std::numeric_limits<double>::infinity();
    for (double h : h_values) {
        ControlField qp = q, qm = q;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            qp.elems[t] = sym_add(q.elems[t], sym_scale(h, direction.elems[t]));
            qm.elems[t] = sym_add(q.elems[t], sym_scale(-h, direction.elems[t]));
        }
        std::vector<double> up = u0, um = u0;
        const double Jp = detail::objective_at(prob, m, qp, up, opts);
        const double Jm = detail::objective_at(prob, m, qm, um, opts);
        const double fd = (Jp - Jm) / (2.0 * h);
        FdCheckRow row;
        row.h = h;
        row.fd_value = fd;
        const double denom = std::max(std::abs(out.analytic), std::abs(fd));
        row.rel_error = denom == 0.0 ? 0.0 : std::abs(fd - out.analytic) / denom;
        out.table.push_back(row);
        out.best_rel_error = std::min(out.best_rel_error, row.rel_error);
    }
    if (out.analytic == 0.0) {
        bool all_zero = true;
        for (const auto& r : out.table) all_zero = all_zero && r.fd_value == 0.0;
        out.degenerate = all_zero;
        if (out.degenerate) out.best_rel_error = 0.0;
    }
    return out;
}

inline std::vector<double> default_fd_steps() {
    return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
}

}  // namespace occ
