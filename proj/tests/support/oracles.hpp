// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference computations. Nothing here calls into the library's
// numerical paths: dot products are straight loops, determinants come from
// cofactor expansion or Eigen's pivoted LU, and subset searches are plain
// enumeration.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "visref/embedding.hpp"

namespace visref::testing {

using Dense = std::vector<std::vector<double>>;

/// Platform-independent uniform draws from a standard-specified engine.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(unit() * static_cast<double>(n)); }
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

inline EmbeddingMatrix random_embeddings(Rng& rng, std::size_t rows, std::size_t dim, double lo = -1.0,
                                         double hi = 1.0) {
    std::vector<double> data(rows * dim);
    for (auto& x : data) x = rng.uniform(lo, hi);
    return {rows, dim, std::move(data)};
}

inline Dense to_dense(const EmbeddingMatrix& m) {
    Dense out(m.rows(), std::vector<double>(m.dim()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) out[i][j] = m(i, j);
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// A[i][j] = v_i . z_j by straight loops.
inline Dense loop_factor(const EmbeddingMatrix& visual, const EmbeddingMatrix& text) {
    const Dense v = to_dense(visual);
    const Dense z = to_dense(text);
    Dense a(v.size(), std::vector<double>(z.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < z.size(); ++j) a[i][j] = dot(v[i], z[j]);
    return a;
}

/// r_i^2 = sum_j (v_i . z_j)^2.
inline std::vector<double> loop_relevance(const EmbeddingMatrix& visual, const EmbeddingMatrix& text) {
    const Dense a = loop_factor(visual, text);
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = dot(a[i], a[i]);
    return r;
}

/// L(i, j) = v_i^T M v_j with M = sum_j z_j z_j^T formed explicitly.
inline Dense loop_kernel_via_subspace(const EmbeddingMatrix& visual, const EmbeddingMatrix& text) {
    const Dense v = to_dense(visual);
    const Dense z = to_dense(text);
    const std::size_t d = visual.dim();
    Dense m(d, std::vector<double>(d, 0.0));
    for (const auto& row : z)
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = 0; q < d; ++q) m[p][q] += row[p] * row[q];
    Dense l(v.size(), std::vector<double>(v.size(), 0.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<double> mv(d, 0.0);
        for (std::size_t p = 0; p < d; ++p) mv[p] = dot(m[p], v[i]);
        for (std::size_t j = 0; j < v.size(); ++j) l[j][i] = dot(v[j], mv);
    }
    return l;
}

/// Full kernel A A^T from straight loops.
inline Dense loop_kernel(const EmbeddingMatrix& visual, const EmbeddingMatrix& text) {
    const Dense a = loop_factor(visual, text);
    Dense l(a.size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) l[i][j] = dot(a[i], a[j]);
    return l;
}

/// Determinant by Laplace expansion along the first row.
inline double cofactor_det(const Dense& m) {
    const std::size_t n = m.size();
    if (n == 0) return 1.0;
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    double det = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        Dense minor(n - 1, std::vector<double>(n - 1));
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t cc = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == c) continue;
                minor[r - 1][cc++] = m[r][k];
            }
        }
        const double sign = (c % 2 == 0) ? 1.0 : -1.0;
        det += sign * m[0][c] * cofactor_det(minor);
    }
    return det;
}

inline Dense restrict(const Dense& l, const std::vector<std::size_t>& s, double jitter) {
    Dense out(s.size(), std::vector<double>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) out[i][j] = l[s[i]][s[j]] + (i == j ? jitter : 0.0);
    return out;
}

/// det(L_S + eps I) by cofactor expansion.
inline double subset_det(const Dense& l, const std::vector<std::size_t>& s, double jitter) {
    return cofactor_det(restrict(l, s, jitter));
}

/// log of det(L_{S+v}) / det(L_S), both with jitter.
inline double log_det_ratio(const Dense& l, std::vector<std::size_t> s, std::size_t v, double jitter) {
    const double base = subset_det(l, s, jitter);
    s.push_back(v);
    return std::log(subset_det(l, s, jitter) / base);
}

/// log det(L_S + eps I) by Eigen's full-pivot LU, a backward-stable route
/// for subsets where cofactor expansion cancels badly.
inline double lu_subset_logdet(const Dense& l, const std::vector<std::size_t>& s, double jitter) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = l[s[static_cast<std::size_t>(i)]][s[static_cast<std::size_t>(j)]] + (i == j ? jitter : 0.0);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    double log_abs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = lu.matrixLU()(i, i);
        if (u == 0.0) return -std::numeric_limits<double>::infinity();
        log_abs += std::log(std::abs(u));
    }
    return lu.determinant() > 0.0 ? log_abs : -std::numeric_limits<double>::infinity();
}

struct EnumerationResult {
    std::vector<std::size_t> subset;
    double logdet = -std::numeric_limits<double>::infinity();
};

/// Best size-m subset by enumerating all combinations in lexicographic
/// order with cofactor determinants. Strictly greater values replace.
inline EnumerationResult enumerate_best(const Dense& l, std::size_t m, double jitter, bool use_lu = false) {
    const std::size_t n = l.size();
    EnumerationResult best;
    std::vector<bool> mask(n, false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(m), true);
    // prev_permutation over a sorted-descending mask walks combinations lexicographically.
    do {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) s.push_back(i);
        double value = -std::numeric_limits<double>::infinity();
        if (use_lu) {
            value = lu_subset_logdet(l, s, jitter);
        } else if (const double det = subset_det(l, s, jitter); det > 0.0) {
            value = std::log(det);
        }
        if (best.subset.empty() || value > best.logdet) best = {s, value};
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

/// Random d x d orthogonal matrix via Gram-Schmidt on uniform draws.
inline Dense random_orthogonal(Rng& rng, std::size_t d) {
    Dense q;
    while (q.size() < d) {
        std::vector<double> v(d);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : q) {
                const double p = dot(v, b);
                for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
            }
        const double norm = std::sqrt(dot(v, v));
        if (norm < 1e-6) continue;
        for (auto& x : v) x /= norm;
        q.push_back(std::move(v));
    }
    return q;
}

/// Rows of m multiplied by q (m * q).
inline EmbeddingMatrix rotate(const EmbeddingMatrix& m, const Dense& q) {
    std::vector<double> out(m.rows() * m.dim(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.dim(); ++k) s += m(i, k) * q[k][j];
            out[i * m.dim() + j] = s;
        }
    return {m.rows(), m.dim(), std::move(out)};
}

inline EmbeddingMatrix scaled(const EmbeddingMatrix& m, double c) {
    std::vector<double> out(m.data().begin(), m.data().end());
    for (auto& x : out) x *= c;
    return {m.rows(), m.dim(), std::move(out)};
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace visref::testing
