// include/voxsep/tensor.hpp
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

#ifndef VOXSEP_TENSOR_HPP
#define VOXSEP_TENSOR_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace voxsep::ad {

// Dense row-major tensor of doubles. All autodiff math runs in double;
// the optional float32 parameter mode quantizes values after each update
// (see trainer.hpp) instead of switching the arithmetic type.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);  // zero-filled
  Tensor(std::vector<int64_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor scalar(double value) { return full({1}, value); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(size_t axis) const { return shape_.at(axis); }
  size_t rank() const { return shape_.size(); }
  int64_t numel() const { return static_cast<int64_t>(values_.size()); }
  bool empty() const { return values_.empty(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& at(int64_t i) { return values_[static_cast<size_t>(i)]; }
  double at(int64_t i) const { return values_[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  void fill(double value);

 private:
  std::vector<int64_t> shape_;
  std::vector<double> values_;
};

int64_t shape_numel(const std::vector<int64_t>& shape);
std::string shape_str(const std::vector<int64_t>& shape);

// Throws ShapeError with both shapes spelled out when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Debug switch: when on, op outputs are scanned for NaN/Inf and a
// ContractError names the op that produced them.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

}  // namespace voxsep::ad

#endif  // VOXSEP_TENSOR_HPP
