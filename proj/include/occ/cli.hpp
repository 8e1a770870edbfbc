#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "occ/config.hpp"
#include "occ/io.hpp"
#include "occ/optimize.hpp"
#include "occ/verify.hpp"

namespace occ::cli {

using nlohmann::json;

/// Owns the mesh so that ObstacleProblem's mesh pointer stays valid.
struct RunSetup {
    Mesh mesh;
    ObstacleProblem prob;
    ControlField q;
};

inline std::unique_ptr<RunSetup> make_setup(const RunConfig& cfg) {
    cfg.validate();
    auto s = std::make_unique<RunSetup>();
    if (!cfg.mesh_file.empty()) {
        std::vector<std::string> warnings;
        s->mesh = read_mesh(cfg.mesh_file, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    } else {
        s->mesh = generate_unit_square(cfg.mesh_n);
    }
    s->prob = make_problem(s->mesh, cfg.psi, cfg.f, cfg.q_min, cfg.q_max, cfg.alpha, cfg.u_d);
    if (!cfg.control_file.empty()) {
        s->q = read_control(cfg.control_file, cfg.q_min, cfg.q_max);
        validate_control(s->q, s->mesh);
        if (!control_is_feasible(s->q, 1e-10))
            throw ConfigError("control file " + cfg.control_file + " is not in Q_ad");
    } else {
        s->q = make_scalar_control(s->mesh.num_triangles(), cfg.q0_scalar, cfg.q_min, cfg.q_max);
        if (!control_is_feasible(s->q, 1e-10))
            throw ConfigError("q0 scalar is outside [q_min, q_max]");
    }
    return s;
}

inline void ensure_out_dir(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
}

inline json state_report_json(const StateSolveReport& rep) {
    return json{{"newton_iterations", rep.newton_iterations},
                {"final_residual_norm", rep.final_residual_norm},
                {"damping_events", rep.damping_events},
                {"r_norm_L2", rep.r_norm_L2},
                {"div_norm_L2", rep.div_norm_L2},
                {"feas_Linf", rep.feas_Linf},
                {"feas_grad_L2", rep.feas_grad_L2},
                {"residual_history", rep.residual_history}};
}

inline json kkt_json(const KKTReport& k) {
    return json{{"gamma", k.gamma},
                {"J", k.J},
                {"comp_state", k.comp_state},
                {"comp_adjoint", k.comp_adjoint},
                {"comp_mu", k.comp_mu},
                {"control_fixed_point_residual", k.control_fixed_point_residual},
                {"vi_residual", k.vi_residual},
                {"mu_L1", k.mu_L1},
                {"u_minus_ud_L1", k.u_minus_ud_L1},
                {"lambda_min_nodal", k.lambda_min_nodal},
                {"p_H1_semi", k.p_H1_semi},
                {"state", state_report_json(k.state)}};
}

/// Two-column log-ready data for external plotting.
inline void write_plot_data(const std::string& path, const std::vector<double>& x,
                            const std::vector<double>& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        out << format_double(x[i]) << " " << format_double(y[i]) << "\n";
}

inline int cmd_solve_state(const RunConfig& cfg, const std::string& out_dir,
                           bool emit_plot_data = false) {
    auto s = make_setup(cfg);
    const SmoothedMax m(cfg.gamma);
    std::vector<double> u0(s->mesh.num_nodes(), 0.0);
    auto [u, report] = solve_regularized_state(s->prob, s->q, m, u0, cfg.newton_options());

    ensure_out_dir(out_dir);
    write_field(u, out_dir + "/u.field");
    json j = state_report_json(report);
    j["gamma"] = cfg.gamma;
    j["norm_note"] = "all norms are L2 surrogates; no discrete H^{-1} norm is computed";
    // Comparison principle surrogate: f <= 0 should force u <= 0.
    double f_max = -std::numeric_limits<double>::infinity();
    double u_max = -std::numeric_limits<double>::infinity();
    for (double v : s->prob.f) f_max = std::max(f_max, v);
    for (double v : u) u_max = std::max(u_max, v);
    if (f_max <= 0.0 && u_max > 1e-10)
        j["warnings"] = json::array({"comparison principle surrogate violated: max u = " +
                                     format_double(u_max)});
    write_json(j, out_dir + "/state_report.json");
    if (emit_plot_data) {
        std::vector<double> iters(report.residual_history.size());
        for (std::size_t i = 0; i < iters.size(); ++i) iters[i] = static_cast<double>(i);
        write_plot_data(out_dir + "/newton_residual.dat", iters, report.residual_history);
    }
    return 0;
}

inline int cmd_oracle(const RunConfig& cfg, const std::string& out_dir,
                      bool emit_plot_data = false) {
    auto s = make_setup(cfg);
    auto [u, lambda] = solve_obstacle_pdas(s->prob, s->q);

    ensure_out_dir(out_dir);
    write_field(u, out_dir + "/u.field");
    write_field(lambda, out_dir + "/lambda.field");
    double comp_violation = 0.0, lambda_min = 0.0, feas_violation = 0.0;
    for (int i : s->mesh.interior_nodes) {
        comp_violation = std::max(comp_violation, std::abs(lambda[i] * (u[i] - s->prob.psi)));
        lambda_min = std::min(lambda_min, lambda[i]);
        feas_violation = std::max(feas_violation, s->prob.psi - u[i]);
    }
    write_json(json{{"complementarity_max_violation", comp_violation},
                    {"lambda_min", lambda_min},
                    {"feasibility_max_violation", feas_violation}},
               out_dir + "/oracle_report.json");
    (void)emit_plot_data;
    return 0;
}

inline int cmd_optimize(const RunConfig& cfg, const std::string& out_dir,
                        bool emit_plot_data = false) {
    auto s = make_setup(cfg);
    const SmoothedMax m(cfg.gamma);
    PathConfig pcfg = cfg.path_config();
    FixedGammaResult res = optimize_fixed_gamma(s->prob, m, s->q, pcfg);

    ensure_out_dir(out_dir);
    write_control(res.q, out_dir + "/q_opt.control");
    write_field(res.u, out_dir + "/u.field");
    write_field(res.p, out_dir + "/p.field");
    json j = kkt_json(res.kkt);
    j["pg_iterations"] = res.pg_iterations;
    j["converged"] = res.converged;
    j["total_newton_iterations"] = res.total_newton_iterations;
    write_json(j, out_dir + "/optimize_report.json");
    (void)emit_plot_data;
    return 0;
}

inline const char* path_csv_header() {
    return "gamma,J,feas_Linf,feas_grad_L2,r_norm,div_norm,comp_state,comp_adjoint,comp_mu,"
           "fixed_point_residual,mu_L1,newton_iters,pg_iters";
}

inline std::string path_csv_row(const PathRecord& rec) {
    const KKTReport& k = rec.kkt;
    std::string row;
    row += format_double(rec.gamma);
    row += "," + format_double(k.J);
    row += "," + format_double(k.state.feas_Linf);
    row += "," + format_double(k.state.feas_grad_L2);
    row += "," + format_double(k.state.r_norm_L2);
    row += "," + format_double(k.state.div_norm_L2);
    row += "," + format_double(k.comp_state);
    row += "," + format_double(k.comp_adjoint);
    row += "," + format_double(k.comp_mu);
    row += "," + format_double(k.control_fixed_point_residual);
    row += "," + format_double(k.mu_L1);
    row += "," + std::to_string(k.state.newton_iterations);
    row += "," + std::to_string(rec.pg_iterations);
    return row;
}

/// Runs the gamma-continuation path and streams path.csv row by row so
/// that a partial CSV survives a solver abort.
inline int cmd_path(const RunConfig& cfg, const std::string& out_dir,
                    bool emit_plot_data = false,
                    std::vector<PathRecord>* records_out = nullptr) {
    auto s = make_setup(cfg);
    const PathConfig pcfg = cfg.path_config();
    pcfg.validate();

    ensure_out_dir(out_dir);
    std::ofstream csv(out_dir + "/path.csv");
    if (!csv) throw std::runtime_error("cannot open file for writing: " + out_dir + "/path.csv");
    csv << path_csv_header() << "\n";
    csv.flush();

    std::vector<PathRecord> records;
    ControlField q = s->q;
    std::vector<double> u(s->mesh.num_nodes(), 0.0);
    int snapshot_index = 0;
    for (double gamma : pcfg.gamma_ladder) {
        const SmoothedMax m(gamma);
        FixedGammaResult res = optimize_fixed_gamma(s->prob, m, q, pcfg, &u);
        PathRecord rec;
        rec.gamma = gamma;
        rec.q = res.q;
        rec.u = res.u;
        rec.p = res.p;
        rec.kkt = res.kkt;
        rec.pg_iterations = res.pg_iterations;
        rec.converged = res.converged;
        csv << path_csv_row(rec) << "\n";
        csv.flush();

        char tag[16];
        std::snprintf(tag, sizeof(tag), "%03d", snapshot_index++);
        write_control(rec.q, out_dir + "/snapshot_" + tag + ".control");
        write_field(rec.u, out_dir + "/snapshot_" + tag + "_u.field");
        write_field(rec.p, out_dir + "/snapshot_" + tag + "_p.field");

        q = rec.q;
        u = rec.u;
        records.push_back(std::move(rec));
    }

    json slopes_json;
    try {
        const PathSlopes slopes = fit_path_slopes(records, pcfg.newton);
        slopes_json = {{"slope_feas_Linf", slopes.slope_feas_Linf},
                       {"slope_feas_grad", slopes.slope_feas_grad},
                       {"slope_comp_state", slopes.slope_comp_state}};
    } catch (const InsufficientData& e) {
        slopes_json = {{"error", e.what()}};
    }
    slopes_json["saturation_floor"] = saturation_floor(pcfg.newton);
    write_json(slopes_json, out_dir + "/slopes.json");

    if (emit_plot_data) {
        std::vector<double> gammas, feas_inf, feas_grad, comp_state;
        for (const auto& rec : records) {
            gammas.push_back(rec.gamma);
            feas_inf.push_back(rec.kkt.state.feas_Linf);
            feas_grad.push_back(rec.kkt.state.feas_grad_L2);
            comp_state.push_back(rec.kkt.comp_state);
        }
        write_plot_data(out_dir + "/feas_Linf_vs_gamma.dat", gammas, feas_inf);
        write_plot_data(out_dir + "/feas_grad_vs_gamma.dat", gammas, feas_grad);
        write_plot_data(out_dir + "/comp_state_vs_gamma.dat", gammas, comp_state);
    }
    if (records_out) *records_out = std::move(records);
    return 0;
}

/// Invariant battery: smoothed-max and projection certificates, bound
/// and rate checks on a fixed-control ladder, oracle consistency, the
/// FD gradient check, and the multiplier L1 bound.
inline std::vector<CheckResult> run_verify_battery(
    const RunConfig& cfg, const SmoothedMaxFactory& factory = polynomial_smoothed_max_factory()) {
    auto s = make_setup(cfg);
    const std::vector<double> ladder = cfg.gamma_ladder();

    std::vector<double> cert_gammas = {1.0};
    cert_gammas.insert(cert_gammas.end(), ladder.begin(), ladder.end());
    std::vector<CheckResult> checks = check_smoothed_max(factory, cert_gammas, cfg.seed);
    const auto proj = check_projection(cfg.seed);
    checks.insert(checks.end(), proj.begin(), proj.end());

    const NewtonOptions nopts = cfg.newton_options();
    const auto records = solve_state_ladder(s->prob, s->q, ladder, nopts);
    for (const auto& c : check_lemma_bounds(s->prob, records)) checks.push_back(c);
    for (const auto& c : check_feasibility_rates(records, nopts)) checks.push_back(c);
    for (const auto& c : check_oracle_consistency(s->prob, s->q, records)) checks.push_back(c);

    // Multiplier L1 bound along the fixed-control ladder.
    double mu_ratio_max = 0.0;
    for (const auto& rec : records) {
        const SmoothedMax m(rec.gamma);
        const auto p = solve_adjoint(s->prob, s->q, rec.u, m, nopts.lin_tol);
        const Multipliers mult = multipliers(s->prob, rec.u, p, m);
        const MuBoundCheck b =
            mu_l1_bound_check(mult.mu, rec.u, s->prob.u_d, s->mesh, cfg.c_mu);
        if (b.bound_rhs > 0.0) mu_ratio_max = std::max(mu_ratio_max, b.mu_L1 / b.bound_rhs);
    }
    checks.push_back({"mu_l1_bound_ratio", mu_ratio_max <= cfg.c_mu, mu_ratio_max, cfg.c_mu});

    for (const auto& c :
         check_fd_gradient(s->prob, 100.0, s->q, cfg.seed, 3, nopts, "q0"))
        checks.push_back(c);
    return checks;
}

inline int cmd_verify(const RunConfig& cfg, const std::string& out_dir,
                      const SmoothedMaxFactory& factory = polynomial_smoothed_max_factory(),
                      std::ostream& os = std::cout) {
    const std::vector<CheckResult> checks = run_verify_battery(cfg, factory);
    int failures = 0;
    json rows = json::array();
    for (const auto& c : checks) {
        os << "CHECK " << c.name << " " << (c.pass ? "PASS" : "FAIL") << " "
           << format_double(c.measured) << " " << format_double(c.threshold) << "\n";
        rows.push_back(json{{"name", c.name},
                            {"pass", c.pass},
                            {"measured", c.measured},
                            {"threshold", c.threshold}});
        if (!c.pass) ++failures;
    }
    if (!out_dir.empty()) {
        ensure_out_dir(out_dir);
        write_json(json{{"checks", rows}, {"failures", failures}},
                   out_dir + "/verify_report.json");
    }
    return failures == 0 ? 0 : 3;
}

/// Aggregates an existing path.csv into a summary JSON.
inline int cmd_report(const RunConfig& cfg, const std::string& out_dir) {
    const std::string csv_path = out_dir + "/path.csv";
    std::ifstream in(csv_path);
    if (!in) throw ConfigError("report: missing " + csv_path + " (run the path command first)");

    std::string header;
    std::getline(in, header);
    if (header != path_csv_header()) throw ConfigError("report: unexpected CSV header");

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError(csv_path, line_number, "bad CSV cell '" + cell + "'");
            }
        }
        if (row.size() != 13) throw ParseError(csv_path, line_number, "expected 13 CSV columns");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("report: path.csv has no data rows");

    std::vector<double> gammas, feas_inf, feas_grad, comp_state;
    for (const auto& r : rows) {
        gammas.push_back(r[0]);
        feas_inf.push_back(r[2]);
        feas_grad.push_back(r[3]);
        comp_state.push_back(r[6]);
    }
    const double floor = saturation_floor(cfg.newton_options());
    json slopes;
    try {
        slopes = {{"slope_feas_Linf", fit_rate(gammas, feas_inf, floor)},
                  {"slope_feas_grad", fit_rate(gammas, feas_grad, floor)},
                  {"slope_comp_state", fit_rate(gammas, comp_state, floor)}};
    } catch (const InsufficientData& e) {
        slopes = {{"error", e.what()}};
    }

    // Measured derivative maximum of the smoothed max (assumed <= 2).
    double deriv_max = 0.0;
    const SmoothedMax m(1.0);
    for (int k = 0; k <= 100000; ++k) deriv_max = std::max(deriv_max, m.deriv(k * 0.5e-5));

    const auto& first = rows.front();
    const auto& last = rows.back();
    write_json(
        json{{"rows", rows.size()},
             {"gamma_first", first[0]},
             {"gamma_last", last[0]},
             {"J_first", first[1]},
             {"J_last", last[1]},
             {"comp_state_decrease_factor", first[6] / std::max(last[6], 1e-300)},
             {"comp_adjoint_decrease_factor", first[7] / std::max(last[7], 1e-300)},
             {"comp_mu_decrease_factor", first[8] / std::max(last[8], 1e-300)},
             {"slopes", slopes},
             {"measured_smoothed_max_deriv_sup", deriv_max},
             {"norm_note", "all norms are L2 surrogates; no discrete H^{-1} norm is computed"},
             {"optimality_note",
              "path points are stationary for the regularized problems; the report validates "
              "optimality-system residuals, not global optimality"}},
        out_dir + "/report.json");
    return 0;
}

/// Maps library exceptions to the documented exit codes: 1 config
/// error, 2 solver failure. Verification failures return 3 directly.
template <typename Fn>
int run_command(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const NewtonFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const PdasFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace occ::cli
