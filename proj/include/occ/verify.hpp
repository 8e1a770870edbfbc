#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "occ/adjoint.hpp"
#include "occ/control.hpp"
#include "occ/optimize.hpp"
#include "occ/smoothed_max.hpp"
#include "occ/state.hpp"

namespace occ {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
};

using SmoothedMaxFactory = std::function<std::unique_ptr<SmoothedMax>(double gamma)>;

inline SmoothedMaxFactory polynomial_smoothed_max_factory() {
    return [](double gamma) { return std::make_unique<SmoothedMax>(gamma); };
}

/// Pointwise certificate for a smoothed-max instance: splice
/// continuity, the bounds 0 <= m <= max(0, x), derivative range, the
/// sandwich (1/c1) m' x <= m <= c2 m' x, and the second-derivative
/// bound |m''| <= M gamma.
inline std::vector<CheckResult> check_smoothed_max(const SmoothedMaxFactory& factory,
                                                   const std::vector<double>& gammas,
                                                   std::uint64_t seed = 42,
                                                   int num_samples = 10000) {
    std::vector<CheckResult> checks;
    double splice_err = 0.0, upper_violation = 0.0, nonneg_violation = 0.0;
    double deriv_range_violation = 0.0, sandwich_violation = 0.0, deriv2_excess = 0.0;
    double fd_deriv_err = 0.0, fd_deriv2_err = 0.0, scaling_err = 0.0;

    std::mt19937_64 rng(seed);
    for (double gamma : gammas) {
        const auto m = factory(gamma);
        const double w = 0.5 / gamma;
        // C2 splice at x = 0 and x = 1/(2 gamma) against the outer branches.
        for (double x0 : {0.0, 2.0 * w}) {
            const double eps = 1e-9 * std::max(1.0, w);
            for (double side : {-eps, eps}) {
                const double x = x0 + side;
                const double exact_v = std::max(0.0, x);
                const double exact_d = x > 0.0 ? 1.0 : 0.0;
                // near the splice the polynomial must agree with the
                // outer branch to O(eps) in value and derivative
                splice_err = std::max(splice_err, std::abs(m->value(x) - exact_v) -
                                                      2.0 * eps * std::max(1.0, gamma));
                (void)exact_d;
            }
            // exact evaluation at the splice points themselves
            splice_err = std::max(splice_err, std::abs(m->value(x0) - std::max(0.0, x0)));
        }
        splice_err = std::max(splice_err, std::abs(m->deriv(0.0) - 0.0));
        splice_err = std::max(splice_err, std::abs(m->deriv(2.0 * w) - 1.0));
        splice_err = std::max(splice_err, std::abs(m->deriv2(0.0)));
        splice_err = std::max(splice_err, std::abs(m->deriv2(2.0 * w)));

        std::uniform_real_distribution<double> dist(-2.0 / gamma, 2.0 / gamma);
        for (int k = 0; k < num_samples; ++k) {
            const double x = dist(rng);
            const double v = m->value(x);
            const double d = m->deriv(x);
            nonneg_violation = std::max(nonneg_violation, -v);
            upper_violation = std::max(upper_violation, v - std::max(0.0, x));
            deriv_range_violation =
                std::max({deriv_range_violation, -d, d - 2.0});
            if (x > 0.0) {
                sandwich_violation =
                    std::max(sandwich_violation, (1.0 / m->c1()) * d * x - v);
                sandwich_violation = std::max(sandwich_violation, v - m->c2() * d * x);
            }
            deriv2_excess = std::max(deriv2_excess,
                                     std::abs(m->deriv2(x)) - m->second_deriv_constant() * gamma);
            // exactness outside the splice window
            if (x <= 0.0 || x >= w) splice_err = std::max(splice_err, std::abs(v - std::max(0.0, x)));
        }

        // Finite-difference consistency of the derivatives.
        std::uniform_real_distribution<double> inner(1e-3 * w, 0.999 * w);
        for (int k = 0; k < 100; ++k) {
            const double x = inner(rng);
            const double h = 1e-6 * w;
            const double fd1 = (m->value(x + h) - m->value(x - h)) / (2.0 * h);
            const double fd2 = (m->deriv(x + h) - m->deriv(x - h)) / (2.0 * h);
            const double d1 = m->deriv(x);
            const double d2 = m->deriv2(x);
            if (std::abs(d1) > 1e-12)
                fd_deriv_err = std::max(fd_deriv_err, std::abs(fd1 - d1) / std::abs(d1));
            if (std::abs(d2) > 1e-6 * gamma)
                fd_deriv2_err = std::max(fd_deriv2_err, std::abs(fd2 - d2) / std::abs(d2));
        }

        // Scaling identity for the polynomial family.
        const auto m1 = factory(1.0);
        std::uniform_real_distribution<double> sdist(0.0, 2.0 * w);
        for (int k = 0; k < 100; ++k) {
            const double x = sdist(rng);
            scaling_err =
                std::max(scaling_err, std::abs(m->value(x) - m1->value(gamma * x) / gamma));
        }
    }

    checks.push_back({"smoothed_max_splice_c2", splice_err <= 1e-12, splice_err, 1e-12});
    checks.push_back({"smoothed_max_nonnegative", nonneg_violation <= 0.0, nonneg_violation, 0.0});
    checks.push_back(
        {"smoothed_max_upper_bound", upper_violation <= 1e-15, upper_violation, 1e-15});
    checks.push_back({"smoothed_max_deriv_range", deriv_range_violation <= 1e-15,
                      deriv_range_violation, 1e-15});
    checks.push_back(
        {"smoothed_max_sandwich", sandwich_violation <= 1e-14, sandwich_violation, 1e-14});
    checks.push_back({"smoothed_max_deriv2_bound", deriv2_excess <= 0.0, deriv2_excess, 0.0});
    checks.push_back({"smoothed_max_fd_deriv", fd_deriv_err <= 1e-6, fd_deriv_err, 1e-6});
    checks.push_back({"smoothed_max_fd_deriv2", fd_deriv2_err <= 1e-6, fd_deriv2_err, 1e-6});
    checks.push_back({"smoothed_max_scaling", scaling_err <= 1e-12, scaling_err, 1e-12});
    return checks;
}

/// Projection certificate: hand-derived examples, idempotence,
/// nonexpansiveness, and the eigenvalue range on random matrices.
inline std::vector<CheckResult> check_projection(std::uint64_t seed = 42,
                                                 int num_samples = 10000) {
    std::vector<CheckResult> checks;

    double example_err = 0.0;
    {
        const SymMat a = project_ad({0.5, 3.0, 0.0}, 1.0, 2.0);
        example_err = std::max({example_err, std::abs(a[0] - 1.0), std::abs(a[1] - 2.0),
                                std::abs(a[2])});
        const SymMat b = project_ad({1.0, 1.0, 0.0}, 0.5, 2.0);
        example_err = std::max({example_err, std::abs(b[0] - 1.0), std::abs(b[1] - 1.0),
                                std::abs(b[2])});
        const SymMat c = project_ad_general(0.0, 2.0, 0.0, 0.0, 0.1, 2.0);
        example_err = std::max({example_err, std::abs(c[0] - 0.55), std::abs(c[1] - 0.55),
                                std::abs(c[2] - 0.45)});
    }
    checks.push_back({"projection_examples", example_err <= 1e-12, example_err, 1e-12});

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    const double q_min = 0.5, q_max = 2.0;
    double idem_err = 0.0, expansion = 0.0, eig_violation = 0.0, fixed_err = 0.0;
    for (int k = 0; k < num_samples; ++k) {
        const SymMat x = {dist(rng), dist(rng), dist(rng)};
        const SymMat y = {dist(rng), dist(rng), dist(rng)};
        const SymMat px = project_ad(x, q_min, q_max);
        const SymMat py = project_ad(y, q_min, q_max);
        const SymMat ppx = project_ad(px, q_min, q_max);
        idem_err = std::max(idem_err,
                            sym_frobenius_norm(sym_add(ppx, sym_scale(-1.0, px))));
        const double dxy = sym_frobenius_norm(sym_add(x, sym_scale(-1.0, y)));
        const double dpq = sym_frobenius_norm(sym_add(px, sym_scale(-1.0, py)));
        expansion = std::max(expansion, dpq - dxy);
        const auto ev = sym_eigenvalues(px);
        eig_violation = std::max({eig_violation, q_min - ev[0], ev[1] - q_max});
        // feasible inputs are fixed points
        const SymMat feas = project_ad({dist(rng), dist(rng), 0.2 * dist(rng)}, q_min, q_max);
        const SymMat pfeas = project_ad(feas, q_min, q_max);
        fixed_err = std::max(fixed_err,
                             sym_frobenius_norm(sym_add(pfeas, sym_scale(-1.0, feas))));
    }
    checks.push_back({"projection_idempotent", idem_err <= 1e-14, idem_err, 1e-14});
    checks.push_back({"projection_nonexpansive", expansion <= 1e-12, expansion, 1e-12});
    checks.push_back({"projection_eigen_range", eig_violation <= 1e-12, eig_violation, 1e-12});
    checks.push_back({"projection_fixed_points", fixed_err <= 1e-14, fixed_err, 1e-14});
    return checks;
}

/// Gamma-independent bound suite on a fixed-control ladder:
/// ||r(gamma; u)|| <= ||f|| and the divergence surrogate <= ||f||.
inline std::vector<CheckResult> check_lemma_bounds(const ObstacleProblem& prob,
                                                   const std::vector<FixedControlRecord>& records) {
    const double f_L2 = norms(prob.f, *prob.mesh).L2;
    const double bound = f_L2 * (1.0 + 1e-6);
    double r_max = 0.0, div_max = 0.0;
    for (const auto& rec : records) {
        r_max = std::max(r_max, rec.report.r_norm_L2);
        div_max = std::max(div_max, rec.report.div_norm_L2);
    }
    return {{"lemma_bound_r_norm", r_max <= bound, r_max, bound},
            {"lemma_bound_div_norm", div_max <= bound, div_max, bound}};
}

/// Feasibility-violation decay rates on a fixed-control ladder.
inline std::vector<CheckResult> check_feasibility_rates(
    const std::vector<FixedControlRecord>& records, const NewtonOptions& opts) {
    std::vector<double> gammas, feas_inf, feas_grad;
    for (const auto& rec : records) {
        gammas.push_back(rec.gamma);
        feas_inf.push_back(rec.report.feas_Linf);
        feas_grad.push_back(rec.report.feas_grad_L2);
    }
    const double floor = saturation_floor(opts);
    const double s_inf = fit_rate(gammas, feas_inf, floor);
    const double s_grad = fit_rate(gammas, feas_grad, floor);
    return {{"rate_feas_Linf", s_inf >= -1.3 && s_inf <= -0.8, s_inf, -0.8},
            {"rate_feas_grad", s_grad >= -0.75 && s_grad <= -0.35, s_grad, -0.35}};
}

/// Regularized states approach the PDAS oracle solution monotonically
/// in the H1 seminorm, with a small final relative L2 error.
inline std::vector<CheckResult> check_oracle_consistency(
    const ObstacleProblem& prob, const ControlField& q,
    const std::vector<FixedControlRecord>& records, double final_rel_tol = 1e-3) {
    const Mesh& mesh = *prob.mesh;
    auto [u_pdas, lambda] = solve_obstacle_pdas(prob, q);
    (void)lambda;
    std::vector<double> h1_dist;
    double final_rel_l2 = 0.0;
    const double u_pdas_l2 = norms(u_pdas, mesh).L2;
    for (const auto& rec : records) {
        std::vector<double> diff(mesh.num_nodes());
        for (int i = 0; i < mesh.num_nodes(); ++i) diff[i] = rec.u[i] - u_pdas[i];
        const NormSet n = norms(diff, mesh);
        h1_dist.push_back(n.H1_semi);
        final_rel_l2 = n.L2 / u_pdas_l2;
    }
    double max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < h1_dist.size(); ++k)
        max_increase = std::max(max_increase, h1_dist[k] - h1_dist[k - 1]);
    const bool decreasing = h1_dist.size() < 2 || max_increase < 0.0;
    return {
        {"oracle_h1_distance_decreasing", decreasing,
         h1_dist.size() < 2 ? 0.0 : max_increase, 0.0},
        {"oracle_final_rel_l2", final_rel_l2 <= final_rel_tol, final_rel_l2, final_rel_tol}};
}

/// Random feasible direction with unit control L2 norm.
inline ControlField random_direction(const Mesh& mesh, const ControlField& like,
                                     std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ControlField d = like;
    for (auto& m : d.elems) m = {dist(rng), dist(rng), dist(rng)};
    const double n = control_norm(d, mesh);
    for (auto& m : d.elems) m = sym_scale(1.0 / n, m);
    return d;
}

/// Gradient correctness against central finite differences for several
/// seeded random directions.
inline std::vector<CheckResult> check_fd_gradient(const ObstacleProblem& prob, double gamma,
                                                  const ControlField& q, std::uint64_t seed,
                                                  int num_directions, const NewtonOptions& opts,
                                                  const std::string& tag) {
    const SmoothedMax m(gamma);
    std::mt19937_64 rng(seed);
    double worst_best = 0.0;
    for (int k = 0; k < num_directions; ++k) {
        const ControlField d = random_direction(*prob.mesh, q, rng);
        const FdCheckResult res =
            fd_gradient_check(prob, m, q, d, default_fd_steps(), opts);
        worst_best = std::max(worst_best, res.best_rel_error);
    }
    return {{"fd_gradient_" + tag, worst_best <= 1e-5, worst_best, 1e-5}};
}

/// Stationarity, limiting-complementarity trends, and multiplier
/// boundedness along an optimized path.
inline std::vector<CheckResult> check_path_criteria(const ObstacleProblem& prob,
                                                    const std::vector<PathRecord>& records,
                                                    double c_mu = 10.0) {
    std::vector<CheckResult> checks;
    double vi_max = 0.0, fp_max = 0.0, lambda_min = 0.0;
    double p_h1_min = std::numeric_limits<double>::infinity(), p_h1_max = 0.0;
    double mu_bound_excess = -std::numeric_limits<double>::infinity();
    for (const auto& rec : records) {
        vi_max = std::max(vi_max, rec.kkt.vi_residual);
        fp_max = std::max(fp_max, rec.kkt.control_fixed_point_residual);
        lambda_min = std::min(lambda_min, rec.kkt.lambda_min_nodal);
        p_h1_min = std::min(p_h1_min, rec.kkt.p_H1_semi);
        p_h1_max = std::max(p_h1_max, rec.kkt.p_H1_semi);
        mu_bound_excess =
            std::max(mu_bound_excess, rec.kkt.mu_L1 - c_mu * rec.kkt.u_minus_ud_L1);
    }
    checks.push_back({"path_vi_residual", vi_max <= 1e-6, vi_max, 1e-6});
    checks.push_back({"path_fixed_point_residual", fp_max <= 1e-5, fp_max, 1e-5});
    checks.push_back({"path_lambda_nonnegative", lambda_min >= -1e-12, lambda_min, -1e-12});

    const auto& first = records.front().kkt;
    const auto& last = records.back().kkt;
    const double dec_state = first.comp_state / std::max(last.comp_state, 1e-300);
    const double dec_adjoint = first.comp_adjoint / std::max(last.comp_adjoint, 1e-300);
    const double dec_mu = first.comp_mu / std::max(last.comp_mu, 1e-300);
    checks.push_back({"path_comp_state_decrease", dec_state >= 10.0, dec_state, 10.0});
    checks.push_back({"path_comp_adjoint_decrease", dec_adjoint >= 10.0, dec_adjoint, 10.0});
    checks.push_back({"path_comp_mu_decrease", dec_mu >= 10.0, dec_mu, 10.0});

    const double p_h1_ratio = p_h1_min > 0.0 ? p_h1_max / p_h1_min : 1.0;
    checks.push_back({"path_adjoint_h1_bounded", p_h1_ratio <= 3.0, p_h1_ratio, 3.0});
    checks.push_back(
        {"path_mu_l1_bound", mu_bound_excess <= 0.0, mu_bound_excess, 0.0});
    (void)prob;
    return checks;
}

}  // namespace occ
