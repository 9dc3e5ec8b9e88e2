// Copyright 2026 The VisRef Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace visref {

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
    parse = 2,       // malformed file, bad argument, invalid input values
    shape = 3,       // dimension mismatch
    infeasible = 4,  // budget or search size cannot be satisfied
    numerical = 5,   // factorization failure, undefined decomposition
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ErrorCode::shape, what) {}
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error(ErrorCode::infeasible, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

}  // namespace visref
