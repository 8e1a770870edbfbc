#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace occ {

/// Conforming triangulation of a convex polygon. Immutable after
/// construction; safe to share read-only between threads.
struct Mesh {
    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 3>> triangles;  // counterclockwise
    std::vector<std::uint8_t> on_boundary;      // one flag per node
    std::vector<int> boundary_nodes;
    std::vector<int> interior_nodes;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
};

struct TriangleGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;  // gradients of the P1 basis
};

inline double signed_area2(const Mesh& mesh, const std::array<int, 3>& t) {
    const auto& a = mesh.nodes[t[0]];
    const auto& b = mesh.nodes[t[1]];
    const auto& c = mesh.nodes[t[2]];
    return (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
}

inline TriangleGeometry triangle_geometry(const Mesh& mesh, int t) {
    if (t < 0 || t >= mesh.num_triangles())
        throw std::invalid_argument("triangle_geometry: triangle index out of range");
    const auto& tri = mesh.triangles[t];
    const double twice_area = signed_area2(mesh, tri);
    if (!(twice_area > 1e-300))
        throw std::runtime_error("triangle_geometry: degenerate triangle " + std::to_string(t));
    const auto& p0 = mesh.nodes[tri[0]];
    const auto& p1 = mesh.nodes[tri[1]];
    const auto& p2 = mesh.nodes[tri[2]];
    TriangleGeometry g;
    g.area = 0.5 * twice_area;
    g.grad[0] = {(p1[1] - p2[1]) / twice_area, (p2[0] - p1[0]) / twice_area};
    g.grad[1] = {(p2[1] - p0[1]) / twice_area, (p0[0] - p2[0]) / twice_area};
    g.grad[2] = {(p0[1] - p1[1]) / twice_area, (p1[0] - p0[0]) / twice_area};
    return g;
}

inline void finalize_node_partition(Mesh& mesh) {
    mesh.boundary_nodes.clear();
    mesh.interior_nodes.clear();
    for (int i = 0; i < mesh.num_nodes(); ++i) {
        if (mesh.on_boundary[i])
            mesh.boundary_nodes.push_back(i);
        else
            mesh.interior_nodes.push_back(i);
    }
}

/// Structured triangulation of the unit square: n x n cells, each split
/// along the lower-left to upper-right diagonal. Nodes are ordered
/// lexicographically by (y, x).
inline Mesh generate_unit_square(int n) {
    if (n < 1) throw std::invalid_argument("generate_unit_square: n must be >= 1");
    Mesh mesh;
    const int np = n + 1;
    mesh.nodes.reserve(static_cast<std::size_t>(np) * np);
    mesh.on_boundary.assign(static_cast<std::size_t>(np) * np, 0);
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            mesh.nodes.push_back({double(i) / n, double(j) / n});
            if (i == 0 || j == 0 || i == n || j == n)
                mesh.on_boundary[static_cast<std::size_t>(j) * np + i] = 1;
        }
    }
    auto vid = [np](int i, int j) { return j * np + i; };
    mesh.triangles.reserve(2u * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1);
            const int v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    finalize_node_partition(mesh);
    return mesh;
}

/// Checks index ranges, orientation and edge conformity.
/// Clockwise triangles are reoriented in place; a note is appended to
/// `warnings` if given. Throws on non-conforming connectivity.
inline void validate_mesh(Mesh& mesh, std::vector<std::string>* warnings = nullptr) {
    const int nn = mesh.num_nodes();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= nn)
                throw std::runtime_error("mesh validation: triangle " + std::to_string(t) +
                                         " references node index out of range");
        }
        const double a2 = signed_area2(mesh, tri);
        if (a2 == 0.0)
            throw std::runtime_error("mesh validation: triangle " + std::to_string(t) +
                                     " is degenerate");
        if (a2 < 0.0) {
            std::swap(tri[1], tri[2]);
            if (warnings)
                warnings->push_back("triangle " + std::to_string(t) +
                                    " was clockwise; reoriented");
        }
    }
    // Edge conformity: interior edges shared by exactly 2 triangles,
    // boundary edges by exactly 1.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    for (const auto& [edge, count] : edge_count) {
        if (count > 2)
            throw std::runtime_error("mesh validation: edge (" + std::to_string(edge.first) +
                                     "," + std::to_string(edge.second) +
                                     ") shared by more than 2 triangles");
        if (count == 1) {
            if (edge.first < nn && edge.second < nn &&
                (!mesh.on_boundary[edge.first] || !mesh.on_boundary[edge.second]))
                throw std::runtime_error("mesh validation: boundary edge (" +
                                         std::to_string(edge.first) + "," +
                                         std::to_string(edge.second) +
                                         ") has endpoints not marked as boundary");
        }
    }
    finalize_node_partition(mesh);
}

}  // namespace occ
