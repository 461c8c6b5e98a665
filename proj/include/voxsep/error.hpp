// include/voxsep/error.hpp
//
// Copyright 2026 The voxsep authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// This code is provided *as is*, without warranties or conditions of any kind.

#ifndef VOXSEP_ERROR_HPP
#define VOXSEP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace voxsep {

// Shape/axis mismatches between tensors or grids.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated call contract (non-scalar loss, consumed tape, bad argument ranges).
class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// File and serialization problems.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint cannot be parsed (truncated, bad magic, bad hash).
class CorruptFileError : public IoError {
 public:
  explicit CorruptFileError(const std::string& msg) : IoError(msg) {}
};

// Checkpoint/config combination is valid on its own but incompatible.
class ConfigMismatchError : public std::runtime_error {
 public:
  explicit ConfigMismatchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced a non-finite loss term.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace voxsep

#endif  // VOXSEP_ERROR_HPP
