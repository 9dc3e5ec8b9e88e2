// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "visref/embedding.hpp"

namespace visref {

/// Text-conditioned subspace operator M = sum_j z_j z_j^T, held through its
/// factor Z. The d x d matrix is only formed by materialize().
class SubspaceOperator {
public:
    explicit SubspaceOperator(EmbeddingMatrix text) : text_(std::move(text)) {}

    std::size_t dim() const noexcept { return text_.dim(); }
    std::size_t rank_bound() const noexcept { return std::min(text_.rows(), text_.dim()); }
    const EmbeddingMatrix& text() const noexcept { return text_; }

    /// u^T M v, evaluated as sum_j (u.z_j)(v.z_j).
    double quadratic_form(std::span<const double> u, std::span<const double> v) const;
    Eigen::VectorXd apply(std::span<const double> v) const;
    Eigen::MatrixXd materialize() const;

private:
    EmbeddingMatrix text_;
};

struct KernelOptions {
    /// Effective jitter is jitter_scale * trace(L) / N.
    double jitter_scale = 1e-6;
    /// Scale every visual and text row to unit norm before forming the factor.
    bool unit_normalize = false;
};

/// Gram factor A (N x T) of the DPP kernel L = A A^T, with
/// A(i, j) = v_i . z_j. The N x N kernel is never stored.
///
/// Subset determinants use L_S + jitter * I. Relevance scores r_i^2 (row
/// norms of A, equal to diag L) are computed once at construction with
/// compensated summation.
class KernelFactor {
public:
    KernelFactor(Eigen::MatrixXd a, double jitter);

    std::size_t size() const noexcept { return static_cast<std::size_t>(a_.rows()); }
    std::size_t text_rows() const noexcept { return static_cast<std::size_t>(a_.cols()); }
    const Eigen::MatrixXd& factor() const noexcept { return a_; }
    double jitter() const noexcept { return jitter_; }
    double trace() const noexcept { return trace_; }
    std::span<const double> relevance() const noexcept { return relevance_; }

    /// L(i, j) without jitter.
    double entry(std::size_t i, std::size_t j) const;

    /// Smallest conditional variance treated as meaningful. Equals the jitter
    /// when positive; otherwise a round-off level relative to the mean
    /// diagonal (or the smallest normal double for an all-zero kernel).
    double variance_floor() const noexcept;

    KernelFactor with_jitter(double jitter) const { return KernelFactor(a_, jitter); }

private:
    Eigen::MatrixXd a_;
    double jitter_;
    double trace_ = 0.0;
    std::vector<double> relevance_;
};

KernelFactor build_kernel_factor(const EmbeddingMatrix& visual, const EmbeddingMatrix& text,
                                 const KernelOptions& options);
KernelFactor build_kernel_factor(const EmbeddingMatrix& visual, const EmbeddingMatrix& text,
                                 double jitter_scale = 1e-6);

/// r_i^2 = sum_j (v_i . z_j)^2 for every visual token.
std::vector<double> relevance_scores(const KernelFactor& k);

/// L_S + jitter * I for an ordered subset. Validates the indices.
Eigen::MatrixXd subset_kernel(const KernelFactor& k, std::span<const std::size_t> subset);

/// Result of an in-place Cholesky factorization of a small SPD matrix.
struct CholeskyPivots {
    /// Squared pivots, i.e. conditional variances in elimination order.
    std::vector<double> pivots;
    double logdet = 0.0;
};

/// Cholesky of a symmetric matrix; throws NumericalError on a non-positive
/// or non-finite pivot.
CholeskyPivots cholesky_pivots(const Eigen::MatrixXd& m);

/// log det(L_S + jitter * I). Throws ParseError for duplicate/out-of-range
/// indices and NumericalError if the restriction is numerically indefinite.
double logdet_subset(const KernelFactor& k, std::span<const std::size_t> subset);

struct DecompositionReport {
    double relevance_sum = 0.0;     // sum_i log(r_i^2 + jitter)
    double diversity_logdet = 0.0;  // log det of the unit-diagonal kernel
    double total_logdet = 0.0;      // log det(L_S + jitter * I)
    double residual = 0.0;          // |total - relevance_sum - diversity_logdet|
    /// Set when some conditional variance is within 10x of the variance
    /// floor, i.e. the subset is rank-deficient and held up by jitter.
    bool degenerate = false;
};

/// Splits log det(L_S) into per-token relevance and the log-determinant of
/// the normalized kernel [L_S]_ij / (r_i r_j). Jitter, when present, is
/// folded into the diagonal before normalizing so the identity stays exact.
DecompositionReport decompose(const KernelFactor& k, std::span<const std::size_t> subset);

}  // namespace visref
