// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#include "visref/embedding.hpp"

#include <cmath>
#include <string>

#include "visref/error.hpp"

namespace visref {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<double> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
    if (rows_ == 0 || dim_ == 0) {
        throw ParseError("embedding matrix must have at least one row and one column");
    }
    if (data_.size() != rows_ * dim_) {
        throw ShapeError("embedding payload has " + std::to_string(data_.size()) + " values, expected " +
                         std::to_string(rows_ * dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw ParseError("non-finite embedding value at row " + std::to_string(i / dim_) + ", column " +
                             std::to_string(i % dim_));
        }
    }
}

EmbeddingMatrix::EmbeddingMatrix(const RowMatrix& m)
    : EmbeddingMatrix(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
                      std::vector<double>(m.data(), m.data() + m.size())) {}

EmbeddingMatrix EmbeddingMatrix::unit_normalized() const {
    std::vector<double> out(data_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double* r = out.data() + i * dim_;
        double sq = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) sq += r[j] * r[j];
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (std::size_t j = 0; j < dim_; ++j) r[j] *= inv;
        }
    }
    return {rows_, dim_, std::move(out)};
}

}  // namespace visref
