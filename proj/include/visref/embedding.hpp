// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace visref {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major matrix of token embeddings, one token per row.
///
/// Holds either the visual tokens of an image or the text tokens of one
/// reasoning step. Construction validates shape and finiteness, so every
/// instance satisfies rows >= 1, dim >= 1 and has no NaN/Inf entries.
class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data);
    explicit EmbeddingMatrix(const RowMatrix& m);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }

    Eigen::Map<const RowMatrix> view() const {
        return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(dim_)};
    }

    /// Copy with every row scaled to unit Euclidean norm. Zero rows stay zero.
    EmbeddingMatrix unit_normalized() const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t rows_;
    std::size_t dim_;
    std::vector<double> data_;
};

}  // namespace visref
