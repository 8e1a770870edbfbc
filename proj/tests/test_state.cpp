#include <catch_amalgamated.hpp>

#include "occ/state.hpp"

using namespace occ;

namespace {

struct Small {
    Mesh mesh;
    ObstacleProblem prob;
    ControlField q;
    Small(int n, double psi, double f, double ud = 0.0) {
        mesh = generate_unit_square(n);
        prob = make_problem(mesh, psi, f, 0.5, 2.0, 1e-3, ud);
        q = make_scalar_control(mesh.num_triangles(), 1.0, 0.5, 2.0);
    }
};

}  // namespace

TEST_CASE("problem validation") {
    const Mesh mesh = generate_unit_square(2);
    CHECK_THROWS_AS(make_problem(mesh, +0.5, -1.0, 0.5, 2.0, 1e-3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(mesh, -0.5, -1.0, 2.0, 0.5, 1e-3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_problem(mesh, -0.5, -1.0, 0.5, 2.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero load gives the zero state without Newton steps") {
    Small s(2, -0.5, 0.0);
    const SmoothedMax m(10.0);
    auto [u, report] = solve_regularized_state(s.prob, s.q, m, std::vector<double>(9, 0.0));
    for (double v : u) CHECK(v == 0.0);
    CHECK(report.newton_iterations == 0);
    CHECK(report.feas_Linf == 0.0);
}

TEST_CASE("n=2 inactive obstacle: center value -1/16") {
    Small s(2, -0.2, -1.0);  // obstacle well below the unconstrained solution
    const SmoothedMax m(1e4);
    auto [u, report] = solve_regularized_state(s.prob, s.q, m, std::vector<double>(9, 0.0));
    CHECK(u[4] == Catch::Approx(-1.0 / 16.0).margin(1e-9));
    CHECK(report.feas_Linf == 0.0);
    CHECK(report.r_norm_L2 == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("n=2 active obstacle approaches psi as gamma grows") {
    Small s(2, -0.03, -1.0);
    // center balance on the exact branch: 4u - (1/4) gamma (psi - u) = -1/4,
    // so psi - u = 0.13 / (4 + gamma/4) -> 0.52 / gamma (lambda -> 0.13)
    for (double gamma : {1e3, 1e4, 1e5}) {
        const SmoothedMax m(gamma);
        auto [u, report] = solve_regularized_state(s.prob, s.q, m, std::vector<double>(9, 0.0));
        const double x = 0.13 / (4.0 + 0.25 * gamma);
        REQUIRE(gamma * x >= 0.5);  // exact branch applies
        CHECK(u[4] == Catch::Approx(-0.03 - x).margin(1e-9));
        CHECK(report.feas_Linf == Catch::Approx(x).margin(1e-9));
    }
}

TEST_CASE("state solve input validation") {
    Small s(2, -0.5, -1.0);
    const SmoothedMax m(10.0);
    CHECK_THROWS_AS(
        solve_regularized_state(s.prob, s.q, m, std::vector<double>(5, 0.0)),
        std::invalid_argument);
    ControlField bad = make_scalar_control(s.mesh.num_triangles(), 5.0, 0.5, 2.0);
    CHECK_THROWS_AS(solve_regularized_state(s.prob, bad, m, std::vector<double>(9, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("comparison principle surrogate: f <= 0 keeps u <= 0") {
    Small s(8, -0.05, -10.0);
    const SmoothedMax m(100.0);
    auto [u, report] =
        solve_regularized_state(s.prob, s.q, m, std::vector<double>(s.mesh.num_nodes(), 0.0));
    for (double v : u) CHECK(v <= 1e-10);
    CHECK(report.final_residual_norm <= 1e-10);
}

TEST_CASE("PDAS oracle: zero load gives zero state and multiplier") {
    Small s(2, -0.5, 0.0);
    auto [u, lambda] = solve_obstacle_pdas(s.prob, s.q);
    for (double v : u) CHECK(v == 0.0);
    for (double v : lambda) CHECK(v == 0.0);
}

TEST_CASE("PDAS oracle: n=2 hand example") {
    Small s(2, -0.03, -1.0);
    auto [u, lambda] = solve_obstacle_pdas(s.prob, s.q);
    CHECK(u[4] == Catch::Approx(-0.03).margin(1e-12));
    CHECK(lambda[4] == Catch::Approx(0.13).margin(1e-10));
    // exact nodal complementarity
    for (int i : s.mesh.interior_nodes)
        CHECK(lambda[i] * (u[i] - s.prob.psi) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("PDAS matches the unconstrained solve when the obstacle is inactive") {
    Small s(8, -100.0, -10.0);
    auto [u, lambda] = solve_obstacle_pdas(s.prob, s.q);
    for (double v : lambda) CHECK(v == 0.0);
    const SparseOperator A = assemble_stiffness(s.mesh, s.q);
    const SparseOperator M = assemble_mass(s.mesh);
    std::vector<double> Mf, rhs(s.mesh.num_nodes(), 0.0);
    M.mult_raw(s.prob.f, Mf);
    for (int i : s.mesh.interior_nodes) rhs[i] = Mf[i];
    SolveOptions lin;
    lin.lin_tol = 1e-12;
    const std::vector<double> u_ref = solve_spd(A, rhs, lin);
    for (int i = 0; i < s.mesh.num_nodes(); ++i)
        CHECK(u[i] == Catch::Approx(u_ref[i]).margin(1e-9));
}

TEST_CASE("regularized solution converges to the PDAS oracle") {
    Small s(8, -0.05, -10.0);
    auto [u_pdas, lambda] = solve_obstacle_pdas(s.prob, s.q);
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> u(s.mesh.num_nodes(), 0.0);
    for (double gamma : {1e1, 1e2, 1e3, 1e4}) {
        const SmoothedMax m(gamma);
        auto [u_g, report] = solve_regularized_state(s.prob, s.q, m, u);
        u = u_g;
        std::vector<double> diff(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - u_pdas[i];
        const double dist = norms(diff, s.mesh).H1_semi;
        CHECK(dist < prev);
        prev = dist;
    }
}
