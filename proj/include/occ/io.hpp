#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "occ/control.hpp"
#include "occ/mesh.hpp"

namespace occ {

struct ParseError : std::runtime_error {
    int line;
    ParseError(const std::string& path, int line_number, const std::string& msg)
        : std::runtime_error(path + ":" + std::to_string(line_number) + ": " + msg),
          line(line_number) {}
};

/// Full-precision decimal rendering, round-trip exact for doubles.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

/// Reads whitespace-separated tokens, skipping blank lines and `#`
/// comments, and tracks line numbers for error reporting.
class TokenReader {
public:
    TokenReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::string next() {
        while (tokens_.empty()) {
            std::string line;
            if (!std::getline(in_, line))
                throw ParseError(path_, line_number_, "unexpected end of file");
            ++line_number_;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) tokens_.push_back(tok);
        }
        std::string t = tokens_.front();
        tokens_.erase(tokens_.begin());
        return t;
    }

    double next_double() {
        const std::string t = next();
        try {
            std::size_t pos = 0;
            const double v = std::stod(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError(path_, line_number_, "expected a number, got '" + t + "'");
        }
    }

    long next_int() {
        const std::string t = next();
        try {
            std::size_t pos = 0;
            const long v = std::stol(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
            return v;
        } catch (const std::exception&) {
            throw ParseError(path_, line_number_, "expected an integer, got '" + t + "'");
        }
    }

    void expect(const std::string& keyword) {
        const std::string t = next();
        if (t != keyword)
            throw ParseError(path_, line_number_, "expected '" + keyword + "', got '" + t + "'");
    }

    int line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::istream& in_;
    std::string path_;
    int line_number_ = 0;
    std::vector<std::string> tokens_;
};

inline std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return in;
}

}  // namespace detail

// Mesh text format:
//   nodes N        followed by N lines "x y"
//   triangles M    followed by M lines "i j k" (0-based)
//   boundary B     followed by B node indices
inline void write_mesh(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "nodes " << mesh.num_nodes() << "\n";
    for (const auto& n : mesh.nodes)
        out << format_double(n[0]) << " " << format_double(n[1]) << "\n";
    out << "triangles " << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
    out << "boundary " << mesh.boundary_nodes.size() << "\n";
    for (int i : mesh.boundary_nodes) out << i << "\n";
}

inline Mesh read_mesh(const std::string& path, std::vector<std::string>* warnings = nullptr) {
    auto in = detail::open_or_throw(path);
    detail::TokenReader r(in, path);
    Mesh mesh;
    r.expect("nodes");
    const long nn = r.next_int();
    if (nn < 3) throw ParseError(path, r.line_number(), "mesh needs at least 3 nodes");
    mesh.nodes.resize(nn);
    for (long i = 0; i < nn; ++i) {
        mesh.nodes[i][0] = r.next_double();
        mesh.nodes[i][1] = r.next_double();
    }
    r.expect("triangles");
    const long nt = r.next_int();
    if (nt < 1) throw ParseError(path, r.line_number(), "mesh needs at least 1 triangle");
    mesh.triangles.resize(nt);
    for (long t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) mesh.triangles[t][k] = static_cast<int>(r.next_int());
    r.expect("boundary");
    const long nb = r.next_int();
    mesh.on_boundary.assign(nn, 0);
    for (long b = 0; b < nb; ++b) {
        const long i = r.next_int();
        if (i < 0 || i >= nn)
            throw ParseError(path, r.line_number(), "boundary node index out of range");
        mesh.on_boundary[i] = 1;
    }
    validate_mesh(mesh, warnings);
    return mesh;
}

// Field text format: "field N" then N nodal values.
inline void write_field(const std::vector<double>& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "field " << field.size() << "\n";
    for (double v : field) out << format_double(v) << "\n";
}

inline std::vector<double> read_field(const std::string& path) {
    auto in = detail::open_or_throw(path);
    detail::TokenReader r(in, path);
    r.expect("field");
    const long n = r.next_int();
    if (n < 0) throw ParseError(path, r.line_number(), "negative field size");
    std::vector<double> field(n);
    for (long i = 0; i < n; ++i) field[i] = r.next_double();
    return field;
}

// Control text format: "control M" then M lines "a11 a22 a12".
inline void write_control(const ControlField& q, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << "control " << q.size() << "\n";
    for (const auto& m : q.elems)
        out << format_double(m[0]) << " " << format_double(m[1]) << " " << format_double(m[2])
            << "\n";
}

inline ControlField read_control(const std::string& path, double q_min, double q_max) {
    auto in = detail::open_or_throw(path);
    detail::TokenReader r(in, path);
    r.expect("control");
    const long n = r.next_int();
    if (n < 1) throw ParseError(path, r.line_number(), "control needs at least 1 element");
    ControlField q;
    q.q_min = q_min;
    q.q_max = q_max;
    q.elems.resize(n);
    for (long t = 0; t < n; ++t)
        for (int k = 0; k < 3; ++k) q.elems[t][k] = r.next_double();
    return q;
}

}  // namespace occ
