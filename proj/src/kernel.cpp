// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/kernel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "summation.hpp"
#include "visref/error.hpp"

namespace visref {

namespace {

void check_vector(std::span<const double> v, std::size_t dim) {
    if (v.size() != dim) {
        throw ShapeError("vector of length " + std::to_string(v.size()) + " does not match dimension " +
                         std::to_string(dim));
    }
}

void check_subset(std::span<const std::size_t> subset, std::size_t n) {
    if (subset.empty()) throw ParseError("subset must contain at least one index");
    std::vector<bool> seen(n, false);
    for (std::size_t idx : subset) {
        if (idx >= n) {
            throw ParseError("subset index " + std::to_string(idx) + " out of range for " + std::to_string(n) +
                             " tokens");
        }
        if (seen[idx]) throw ParseError("duplicate subset index " + std::to_string(idx));
        seen[idx] = true;
    }
}

}  // namespace

double SubspaceOperator::quadratic_form(std::span<const double> u, std::span<const double> v) const {
    check_vector(u, dim());
    check_vector(v, dim());
    detail::CompensatedSum acc;
    for (std::size_t j = 0; j < text_.rows(); ++j) {
        const auto z = text_.row(j);
        double zu = 0.0;
        double zv = 0.0;
        for (std::size_t c = 0; c < z.size(); ++c) {
            zu += z[c] * u[c];
            zv += z[c] * v[c];
        }
        acc.add(zu * zv);
    }
    return acc.value();
}

Eigen::VectorXd SubspaceOperator::apply(std::span<const double> v) const {
    check_vector(v, dim());
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const auto z = text_.view();
    return z.transpose() * (z * x);
}

Eigen::MatrixXd SubspaceOperator::materialize() const {
    const auto z = text_.view();
    return z.transpose() * z;
}

KernelFactor::KernelFactor(Eigen::MatrixXd a, double jitter) : a_(std::move(a)), jitter_(jitter) {
    if (a_.rows() == 0) throw ParseError("kernel factor needs at least one visual token");
    if (!(jitter_ >= 0.0) || !std::isfinite(jitter_)) {
        throw ParseError("jitter must be finite and nonnegative");
    }
    relevance_.resize(static_cast<std::size_t>(a_.rows()));
    detail::CompensatedSum trace;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        detail::CompensatedSum row;
        for (Eigen::Index j = 0; j < a_.cols(); ++j) {
            const double x = a_(i, j);
            row.add(x * x);
        }
        const double r2 = row.value();
        if (!std::isfinite(r2)) throw NumericalError("kernel factor overflowed at token " + std::to_string(i));
        relevance_[static_cast<std::size_t>(i)] = r2;
        trace.add(r2);
    }
    trace_ = trace.value();
}

double KernelFactor::entry(std::size_t i, std::size_t j) const {
    return a_.row(static_cast<Eigen::Index>(i)).dot(a_.row(static_cast<Eigen::Index>(j)));
}

double KernelFactor::variance_floor() const noexcept {
    if (jitter_ > 0.0) return jitter_;
    if (trace_ > 0.0) return 1e-14 * trace_ / static_cast<double>(size());
    return std::numeric_limits<double>::min();
}

KernelFactor build_kernel_factor(const EmbeddingMatrix& visual, const EmbeddingMatrix& text,
                                 const KernelOptions& options) {
    if (visual.dim() != text.dim()) {
        throw ShapeError("visual dim " + std::to_string(visual.dim()) + " != text dim " +
                         std::to_string(text.dim()));
    }
    if (!(options.jitter_scale >= 0.0) || !std::isfinite(options.jitter_scale)) {
        throw ParseError("jitter scale must be finite and nonnegative");
    }
    Eigen::MatrixXd a;
    if (options.unit_normalize) {
        a = visual.unit_normalized().view() * text.unit_normalized().view().transpose();
    } else {
        a = visual.view() * text.view().transpose();
    }
    KernelFactor unjittered(std::move(a), 0.0);
    const double jitter = options.jitter_scale * unjittered.trace() / static_cast<double>(unjittered.size());
    return unjittered.with_jitter(jitter);
}

KernelFactor build_kernel_factor(const EmbeddingMatrix& visual, const EmbeddingMatrix& text,
                                 double jitter_scale) {
    return build_kernel_factor(visual, text, KernelOptions{jitter_scale, false});
}

std::vector<double> relevance_scores(const KernelFactor& k) {
    const auto r = k.relevance();
    return {r.begin(), r.end()};
}

Eigen::MatrixXd subset_kernel(const KernelFactor& k, std::span<const std::size_t> subset) {
    check_subset(subset, k.size());
    const auto m = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd rows(m, k.factor().cols());
    for (Eigen::Index i = 0; i < m; ++i) rows.row(i) = k.factor().row(static_cast<Eigen::Index>(subset[i]));
    Eigen::MatrixXd out = rows * rows.transpose();
    // Exact diagonal from the compensated row norms keeps L_S(i, i) == r_i^2.
    for (Eigen::Index i = 0; i < m; ++i) out(i, i) = k.relevance()[subset[i]] + k.jitter();
    return out;
}

CholeskyPivots cholesky_pivots(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols()) throw ShapeError("cholesky needs a square matrix");
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    CholeskyPivots out;
    out.pivots.reserve(static_cast<std::size_t>(n));
    detail::CompensatedSum logdet;
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
        if (!(pivot > 0.0) || !std::isfinite(pivot)) {
            throw NumericalError("matrix is numerically indefinite (pivot " + std::to_string(pivot) + " at row " +
                                 std::to_string(j) + ")");
        }
        const double root = std::sqrt(pivot);
        l(j, j) = root;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
        }
        out.pivots.push_back(pivot);
        logdet.add(std::log(pivot));
    }
    out.logdet = logdet.value();
    return out;
}

double logdet_subset(const KernelFactor& k, std::span<const std::size_t> subset) {
    return cholesky_pivots(subset_kernel(k, subset)).logdet;
}

DecompositionReport decompose(const KernelFactor& k, std::span<const std::size_t> subset) {
    const Eigen::MatrixXd ls = subset_kernel(k, subset);
    const Eigen::Index m = ls.rows();

    Eigen::VectorXd inv_root(m);
    detail::CompensatedSum relevance;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = ls(i, i);
        if (!(d > 0.0)) {
            throw NumericalError("token " + std::to_string(subset[static_cast<std::size_t>(i)]) +
                                 " has zero relevance; decomposition is undefined without jitter");
        }
        relevance.add(std::log(d));
        inv_root(i) = 1.0 / std::sqrt(d);
    }
    const Eigen::MatrixXd normalized = inv_root.asDiagonal() * ls * inv_root.asDiagonal();

    const CholeskyPivots total = cholesky_pivots(ls);
    const CholeskyPivots diversity = cholesky_pivots(normalized);

    DecompositionReport rep;
    rep.relevance_sum = relevance.value();
    rep.diversity_logdet = diversity.logdet;
    rep.total_logdet = total.logdet;
    rep.residual = std::abs(rep.total_logdet - rep.relevance_sum - rep.diversity_logdet);
    const double floor = k.variance_floor();
    for (double p : total.pivots) {
        if (p <= 10.0 * floor) rep.degenerate = true;
    }
    return rep;
}

}  // namespace visref
