// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nervkit {

/// Invalid model/run configuration (bad field values, mismatched shapes at
/// construction time). CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing or malformed input data (frames, checkpoints, bitstreams).
/// CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values or other numeric breakdown at run time.
/// CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller broke a documented precondition (shape mismatch between tensors
/// that were required to agree, symbol outside a frequency table, ...).
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace nervkit
