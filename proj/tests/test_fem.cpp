#include <random>

#include <catch_amalgamated.hpp>

#include "occ/fem.hpp"

using namespace occ;

namespace {

Mesh single_triangle() {
    Mesh mesh;
    mesh.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    mesh.triangles = {{0, 1, 2}};
    mesh.on_boundary = {1, 1, 1};
    finalize_node_partition(mesh);
    return mesh;
}

}  // namespace

TEST_CASE("element stiffness for q = I on the unit right triangle") {
    const Mesh mesh = single_triangle();
    const SparseOperator A =
        assemble_stiffness(mesh, make_scalar_control(1, 1.0, 0.5, 2.0), /*apply_mask=*/false);
    const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(A.entry(i, j) == Catch::Approx(expected[i][j]).margin(1e-15));
}

TEST_CASE("element mass block and lumped mass") {
    const Mesh mesh = single_triangle();
    const SparseOperator M = assemble_mass(mesh);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(M.entry(i, j) == Catch::Approx(0.5 / 12.0 * (i == j ? 2.0 : 1.0)));
    const std::vector<double> mL = lumped_mass(mesh);
    for (int i = 0; i < 3; ++i) CHECK(mL[i] == Catch::Approx(0.5 / 3.0));
}

TEST_CASE("n=2 center node: Laplace diagonal 4, mass row sum 1/4") {
    const Mesh mesh = generate_unit_square(2);
    const SparseOperator L = assemble_laplace(mesh, /*apply_mask=*/false);
    CHECK(L.entry(4, 4) == Catch::Approx(4.0));
    const SparseOperator M = assemble_mass(mesh);
    double row_sum = 0.0;
    for (int j = 0; j < 9; ++j) row_sum += M.entry(4, j);
    CHECK(row_sum == Catch::Approx(0.25));
    CHECK(lumped_mass(mesh)[4] == Catch::Approx(0.25));
}

TEST_CASE("stiffness is linear in q and scales with scalar controls") {
    const Mesh mesh = generate_unit_square(3);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.6, 1.9);
    ControlField q1 = make_scalar_control(mesh.num_triangles(), 1.0, 0.1, 10.0);
    ControlField q2 = q1;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        q1.elems[t] = {dist(rng), dist(rng), 0.05 * (dist(rng) - 1.25)};
        q2.elems[t] = {dist(rng), dist(rng), 0.05 * (dist(rng) - 1.25)};
    }
    ControlField qsum = q1;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        qsum.elems[t] = sym_add(q1.elems[t], q2.elems[t]);
    const SparseOperator A1 = assemble_stiffness(mesh, q1, false);
    const SparseOperator A2 = assemble_stiffness(mesh, q2, false);
    const SparseOperator As = assemble_stiffness(mesh, qsum, false);
    for (int i = 0; i < mesh.num_nodes(); ++i)
        for (int k = As.row_ptr[i]; k < As.row_ptr[i + 1]; ++k) {
            const int j = As.col[k];
            CHECK(As.val[k] == Catch::Approx(A1.entry(i, j) + A2.entry(i, j)).margin(1e-13));
        }

    const SparseOperator L = assemble_laplace(mesh, false);
    const SparseOperator A17 =
        assemble_stiffness(mesh, make_scalar_control(mesh.num_triangles(), 1.7, 0.1, 10.0), false);
    for (int i = 0; i < mesh.num_nodes(); ++i)
        for (int k = L.row_ptr[i]; k < L.row_ptr[i + 1]; ++k)
            CHECK(A17.entry(i, L.col[k]) == Catch::Approx(1.7 * L.val[k]).margin(1e-13));
}

TEST_CASE("stiffness coercivity on interior-supported vectors") {
    const Mesh mesh = generate_unit_square(4);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ControlField q = make_scalar_control(mesh.num_triangles(), 1.0, 0.5, 2.0);
    for (auto& m : q.elems) m = project_ad({1.0 + 0.4 * dist(rng), 1.0 + 0.4 * dist(rng),
                                            0.2 * dist(rng)}, 0.5, 2.0);
    const SparseOperator A = assemble_stiffness(mesh, q);
    const SparseOperator L = assemble_laplace(mesh);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(mesh.num_nodes(), 0.0);
        for (int i : mesh.interior_nodes) x[i] = dist(rng);
        std::vector<double> Ax, Lx;
        A.mult(x, Ax);
        L.mult(x, Lx);
        const double xAx = dot(x, Ax);
        const double xLx = dot(x, Lx);
        CHECK(xAx >= 0.5 * xLx - 1e-12);
        CHECK(xAx <= 2.0 * xLx + 1e-12);
    }
}

TEST_CASE("PCG recovers constructed solutions") {
    const Mesh mesh = generate_unit_square(8);
    const SparseOperator A = assemble_laplace(mesh);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x_star(mesh.num_nodes(), 0.0);
    for (int i : mesh.interior_nodes) x_star[i] = dist(rng);
    std::vector<double> b;
    A.mult(x_star, b);
    const std::vector<double> x = solve_spd(A, b);
    for (int i = 0; i < mesh.num_nodes(); ++i) CHECK(std::abs(x[i] - x_star[i]) < 1e-8);
}

TEST_CASE("PCG rejects indefinite operators") {
    SparseOperator A;
    A.n = 2;
    A.row_ptr = {0, 1, 2};
    A.col = {0, 1};
    A.val = {1.0, -1.0};
    CHECK_THROWS_AS(solve_spd(A, {1.0, 1.0}), SolverFailure);
}

TEST_CASE("triangle quadrature integrates degree-5 polynomials") {
    // int_T x^4 y over the unit right triangle = 4! 1! / 7! = 1/210.
    double integral = 0.0;
    for (const auto& qp : triangle_quadrature()) {
        const double x = qp.l1, y = qp.l2;
        integral += qp.w * x * x * x * x * y;
    }
    CHECK(0.5 * integral == Catch::Approx(1.0 / 210.0).epsilon(1e-13));
}

TEST_CASE("norm set on exactly representable fields") {
    const Mesh mesh = generate_unit_square(4);
    std::vector<double> ones(mesh.num_nodes(), 1.0);
    const NormSet n1 = norms(ones, mesh);
    CHECK(n1.L2 == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(n1.L1 == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(n1.Linf == Catch::Approx(1.0));
    CHECK(n1.H1_semi == Catch::Approx(0.0).margin(1e-10));

    std::vector<double> xf(mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) xf[i] = mesh.nodes[i][0];
    const NormSet nx = norms(xf, mesh, 3.0);
    CHECK(nx.L2 == Catch::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-13));
    CHECK(nx.H1_semi == Catch::Approx(1.0).epsilon(1e-13));
    CHECK(nx.Ls == Catch::Approx(std::pow(0.25, 1.0 / 3.0)).epsilon(1e-13));

    CHECK_THROWS_AS(norms(xf, mesh, 0.5), std::invalid_argument);
    const NormSet ninf = norms(xf, mesh, std::numeric_limits<double>::infinity());
    CHECK(ninf.Ls == Catch::Approx(1.0));
}
