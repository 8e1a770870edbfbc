#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "occ/cli.hpp"

using namespace occ;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.mesh_n = 6;
    cfg.gamma = 100.0;
    cfg.gamma_min = 10.0;
    cfg.gamma_max = 1000.0;
    cfg.gamma_ratio = 10.0;
    return cfg;
}

}  // namespace

TEST_CASE("solve-state with zero load writes a zero field") {
    RunConfig cfg = small_config();
    cfg.f = 0.0;
    const std::string out = temp_dir("occ_cli_zero");
    REQUIRE(cli::cmd_solve_state(cfg, out) == 0);
    const auto u = read_field(out + "/u.field");
    REQUIRE(static_cast<int>(u.size()) == (cfg.mesh_n + 1) * (cfg.mesh_n + 1));
    for (double v : u) CHECK(v == 0.0);
    CHECK(fs::exists(out + "/state_report.json"));
}

TEST_CASE("invalid configs map to exit code 1") {
    RunConfig cfg = small_config();
    cfg.psi = 0.5;
    const int code = cli::run_command([&] { return cli::cmd_solve_state(cfg, "/tmp/occ_unused"); });
    CHECK(code == 1);
    RunConfig bad_ladder = small_config();
    bad_ladder.gamma_ratio = 0.5;
    CHECK(cli::run_command([&] { return cli::cmd_path(bad_ladder, "/tmp/occ_unused"); }) == 1);
}

TEST_CASE("oracle with zero load writes a zero multiplier") {
    RunConfig cfg = small_config();
    cfg.f = 0.0;
    const std::string out = temp_dir("occ_cli_oracle");
    REQUIRE(cli::cmd_oracle(cfg, out) == 0);
    for (double v : read_field(out + "/lambda.field")) CHECK(v == 0.0);
}

TEST_CASE("path command: one-entry ladder yields one CSV row") {
    RunConfig cfg = small_config();
    cfg.gamma_min = cfg.gamma_max = 100.0;
    const std::string out = temp_dir("occ_cli_path1");
    REQUIRE(cli::cmd_path(cfg, out) == 0);
    const std::string csv = slurp(out + "/path.csv");
    std::istringstream lines(csv);
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    CHECK(header == cli::path_csv_header());
    REQUIRE(std::getline(lines, row));
    CHECK(row.substr(0, 4) == "100,");
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(fs::exists(out + "/slopes.json"));
    CHECK(fs::exists(out + "/snapshot_000.control"));
}

TEST_CASE("path command is deterministic and feeds report") {
    const RunConfig cfg = small_config();
    const std::string out1 = temp_dir("occ_cli_det1");
    const std::string out2 = temp_dir("occ_cli_det2");
    std::vector<PathRecord> records;
    REQUIRE(cli::cmd_path(cfg, out1, /*emit_plot_data=*/true, &records) == 0);
    REQUIRE(cli::cmd_path(cfg, out2) == 0);
    CHECK(slurp(out1 + "/path.csv") == slurp(out2 + "/path.csv"));
    REQUIRE(records.size() == 3);
    CHECK(fs::exists(out1 + "/feas_Linf_vs_gamma.dat"));

    REQUIRE(cli::cmd_report(cfg, out1) == 0);
    CHECK(fs::exists(out1 + "/report.json"));
    // report on an empty directory is a config error
    CHECK(cli::run_command([&] { return cli::cmd_report(cfg, temp_dir("occ_cli_empty")); }) == 1);
}

TEST_CASE("optimize command writes control and reports") {
    RunConfig cfg = small_config();
    const std::string out = temp_dir("occ_cli_opt");
    REQUIRE(cli::cmd_optimize(cfg, out) == 0);
    const ControlField q = read_control(out + "/q_opt.control", cfg.q_min, cfg.q_max);
    CHECK(control_is_feasible(q, 1e-10));
    CHECK(fs::exists(out + "/optimize_report.json"));
}

TEST_CASE("verify reports a broken smoothed-max plugin with exit 3") {
    struct Broken : SmoothedMax {
        using SmoothedMax::SmoothedMax;
        double value(double x) const override { return SmoothedMax::value(x) + 0.05; }
    };
    RunConfig cfg = small_config();
    std::ostringstream os;
    const int code = cli::cmd_verify(
        cfg, temp_dir("occ_cli_verify_broken"),
        [](double gamma) { return std::make_unique<Broken>(gamma); }, os);
    CHECK(code == 3);
    CHECK(os.str().find("CHECK smoothed_max_upper_bound FAIL") != std::string::npos);
    CHECK(os.str().find("CHECK projection_idempotent PASS") != std::string::npos);
}

TEST_CASE("infeasible control file maps to a config error") {
    RunConfig cfg = small_config();
    const std::string path =
        (fs::temp_directory_path() / "occ_infeasible.control").string();
    const Mesh mesh = generate_unit_square(cfg.mesh_n);
    write_control(make_scalar_control(mesh.num_triangles(), 5.0, cfg.q_min, cfg.q_max), path);
    cfg.control_file = path;
    CHECK(cli::run_command([&] { return cli::cmd_solve_state(cfg, "/tmp/occ_unused"); }) == 1);
    fs::remove(path);
}
