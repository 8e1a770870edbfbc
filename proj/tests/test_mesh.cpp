#include <catch_amalgamated.hpp>

#include "occ/mesh.hpp"

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

TEST_CASE("unit square generator, n=2") {
    const Mesh mesh = generate_unit_square(2);
    REQUIRE(mesh.num_nodes() == 9);
    REQUIRE(mesh.num_triangles() == 8);
    REQUIRE(mesh.boundary_nodes.size() == 8);
    REQUIRE(mesh.interior_nodes == std::vector<int>{4});
    CHECK(mesh.nodes[4][0] == Catch::Approx(0.5));
    CHECK(mesh.nodes[4][1] == Catch::Approx(0.5));

    double total_area = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a2 = signed_area2(mesh, mesh.triangles[t]);
        CHECK(a2 > 0.0);  // counterclockwise
        total_area += 0.5 * a2;
    }
    CHECK(total_area == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("unit square generator rejects n < 1") {
    CHECK_THROWS_AS(generate_unit_square(0), std::invalid_argument);
}

TEST_CASE("P1 basis gradients on the unit right triangle") {
    const Mesh mesh = single_triangle();
    const TriangleGeometry g = triangle_geometry(mesh, 0);
    CHECK(g.area == Catch::Approx(0.5));
    CHECK(g.grad[0][0] == Catch::Approx(-1.0));
    CHECK(g.grad[0][1] == Catch::Approx(-1.0));
    CHECK(g.grad[1][0] == Catch::Approx(1.0));
    CHECK(g.grad[1][1] == Catch::Approx(0.0));
    CHECK(g.grad[2][0] == Catch::Approx(0.0));
    CHECK(g.grad[2][1] == Catch::Approx(1.0));
}

TEST_CASE("basis gradients sum to zero") {
    const Mesh mesh = generate_unit_square(3);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto g = triangle_geometry(mesh, t);
        for (int c = 0; c < 2; ++c)
            CHECK(std::abs(g.grad[0][c] + g.grad[1][c] + g.grad[2][c]) < 1e-14);
    }
}

TEST_CASE("validate_mesh reorients clockwise triangles with a warning") {
    Mesh mesh = single_triangle();
    std::swap(mesh.triangles[0][1], mesh.triangles[0][2]);  // now clockwise
    std::vector<std::string> warnings;
    validate_mesh(mesh, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(signed_area2(mesh, mesh.triangles[0]) > 0.0);
}

TEST_CASE("validate_mesh rejects bad connectivity") {
    SECTION("node index out of range") {
        Mesh mesh = single_triangle();
        mesh.triangles[0][2] = 7;
        CHECK_THROWS_AS(validate_mesh(mesh), std::runtime_error);
    }
    SECTION("degenerate triangle") {
        Mesh mesh = single_triangle();
        mesh.nodes[2] = {2.0, 0.0};  // collinear
        CHECK_THROWS_AS(validate_mesh(mesh), std::runtime_error);
    }
    SECTION("edge shared by three triangles") {
        Mesh mesh;
        mesh.nodes = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.5, -1.0}};
        mesh.triangles = {{0, 1, 2}, {1, 3, 2}, {1, 4, 2}};  // (1,2) used three times
        mesh.on_boundary = {1, 1, 1, 1, 1};
        CHECK_THROWS_AS(validate_mesh(mesh), std::runtime_error);
    }
    SECTION("boundary edge endpoint not marked") {
        Mesh mesh = single_triangle();
        mesh.on_boundary[1] = 0;
        CHECK_THROWS_AS(validate_mesh(mesh), std::runtime_error);
    }
}
