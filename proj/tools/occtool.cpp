#include <string>

#include <CLI11.hpp>

#include "occ/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"P1 solver suite for obstacle-problem coefficient control"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool emit_plot_data = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "INI config file (defaults used when omitted)");
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "RNG seed override")->each([&](const std::string&) {
            seed_given = true;
        });
        cmd->add_flag("--emit-plot-data", emit_plot_data,
                      "write two-column .dat files for external plotting");
    };

    CLI::App* c_solve = app.add_subcommand("solve-state", "solve the regularized state equation");
    CLI::App* c_oracle = app.add_subcommand("oracle", "primal-dual active set obstacle solve");
    CLI::App* c_opt = app.add_subcommand("optimize", "fixed-gamma control optimization");
    CLI::App* c_path = app.add_subcommand("path", "gamma-continuation path with CSV output");
    CLI::App* c_verify = app.add_subcommand("verify", "run the invariant battery");
    CLI::App* c_report = app.add_subcommand("report", "summarize an existing path.csv");
    for (CLI::App* c : {c_solve, c_oracle, c_opt, c_path, c_verify, c_report}) add_common(c);

    CLI11_PARSE(app, argc, argv);

    return occ::cli::run_command([&]() -> int {
        occ::RunConfig cfg = config_path.empty()
                                 ? occ::RunConfig{}
                                 : occ::RunConfig::from_ini(occ::IniFile::parse_file(config_path));
        if (seed_given) cfg.seed = seed;
        cfg.validate();
        if (c_solve->parsed()) return occ::cli::cmd_solve_state(cfg, out_dir, emit_plot_data);
        if (c_oracle->parsed()) return occ::cli::cmd_oracle(cfg, out_dir, emit_plot_data);
        if (c_opt->parsed()) return occ::cli::cmd_optimize(cfg, out_dir, emit_plot_data);
        if (c_path->parsed()) return occ::cli::cmd_path(cfg, out_dir, emit_plot_data);
        if (c_verify->parsed()) return occ::cli::cmd_verify(cfg, out_dir);
        if (c_report->parsed()) return occ::cli::cmd_report(cfg, out_dir);
        return 1;
    });
}
