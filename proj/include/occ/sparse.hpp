#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace occ {

struct SolverFailure : std::runtime_error {
    double final_residual;
    SolverFailure(const std::string& msg, double res)
        : std::runtime_error(msg), final_residual(res) {}
};

/// Symmetric sparse matrix in CSR form with an optional constraint mask.
/// Constrained rows/columns act as the identity in `mult`, so the
/// operator restricted to free nodes keeps its SPD structure.
struct SparseOperator {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;
    std::vector<std::uint8_t> constrained;  // empty means no constraints

    bool is_constrained(int i) const {
        return !constrained.empty() && constrained[i] != 0;
    }

    double entry(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == j) return val[k];
        return 0.0;
    }

    /// y = A x with the constraint mask applied.
    void mult(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            if (is_constrained(i)) {
                y[i] = x[i];
                continue;
            }
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                const int j = col[k];
                if (!is_constrained(j)) s += val[k] * x[j];
            }
            y[i] = s;
        }
    }

    /// y = A x ignoring the mask.
    void mult_raw(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (int i = 0; i < n; ++i) d[i] = entry(i, i);
        return d;
    }
};

/// Accumulates (i, j, v) triplets and compresses them into CSR in a
/// fixed order, so repeated assemblies are bitwise identical.
class TripletAccumulator {
public:
    explicit TripletAccumulator(int n) : n_(n) {}

    void add(int i, int j, double v) { entries_.push_back({i, j, v}); }

    SparseOperator compress() const {
        std::vector<Entry> sorted = entries_;
        std::stable_sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
            return a.i != b.i ? a.i < b.i : a.j < b.j;
        });
        SparseOperator A;
        A.n = n_;
        A.row_ptr.assign(n_ + 1, 0);
        for (std::size_t k = 0; k < sorted.size();) {
            std::size_t m = k;
            double s = 0.0;
            while (m < sorted.size() && sorted[m].i == sorted[k].i && sorted[m].j == sorted[k].j)
                s += sorted[m++].v;
            A.col.push_back(sorted[k].j);
            A.val.push_back(s);
            ++A.row_ptr[sorted[k].i + 1];
            k = m;
        }
        for (int i = 0; i < n_; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
        return A;
    }

private:
    struct Entry {
        int i, j;
        double v;
    };
    int n_;
    std::vector<Entry> entries_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct SolveOptions {
    double lin_tol = 1e-10;  // relative residual target
    int max_iters = 0;       // 0: 10 * dimension
};

/// Jacobi-preconditioned conjugate gradients. Deterministic: fixed
/// iteration order, no reorderings. Entries of b at constrained
/// indices are ignored (the solution copies x0 there).
inline std::vector<double> solve_spd(const SparseOperator& A, const std::vector<double>& b,
                                     const SolveOptions& opts = {},
                                     const std::vector<double>* x0 = nullptr) {
    const int n = A.n;
    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> rhs = b;
    for (int i = 0; i < n; ++i)
        if (A.is_constrained(i)) {
            rhs[i] = x[i];
        }
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) return std::vector<double>(n, 0.0);

    std::vector<double> diag = A.diagonal();
    for (int i = 0; i < n; ++i)
        if (diag[i] <= 0.0) diag[i] = 1.0;

    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.mult(x, Ap);
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    const int cap = opts.max_iters > 0 ? opts.max_iters : 10 * n;
    double resnorm = norm2(r);
    for (int it = 0; it < cap && resnorm / bnorm > opts.lin_tol; ++it) {
        A.mult(p, Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0)
            throw SolverFailure("solve_spd: operator not positive definite", resnorm / bnorm);
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        resnorm = norm2(r);
    }
    if (resnorm / bnorm > opts.lin_tol)
        throw SolverFailure("solve_spd: iteration cap exceeded", resnorm / bnorm);
    return x;
}

}  // namespace occ
