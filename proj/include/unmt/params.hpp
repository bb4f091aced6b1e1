// Copyright 2026 The unmt-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "unmt/tape.hpp"
#include "unmt/tensor.hpp"

namespace unmt {

/// Named, ordered collection of trainable tensors. Order is insertion order
/// and is what checkpoints and gradient buffers index by.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  Tensor& value(std::size_t i) { return values_.at(i); }
  const Tensor& value(std::size_t i) const { return values_.at(i); }
  bool trainable(std::size_t i) const { return trainable_.at(i) != 0; }
  void set_trainable(std::size_t i, bool t) { trainable_.at(i) = t ? 1 : 0; }
  /// Throws std::out_of_range for unknown names.
  std::size_t index_of(const std::string& name) const;
  std::size_t scalar_count() const;

  /// Registers every tensor on the tape; frozen tensors get no gradient.
  std::vector<Var> bind(Tape& tape) const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<char> trainable_;
};

/// Gradient accumulator shaped like a ParameterSet.
class GradientBuffer {
 public:
  explicit GradientBuffer(const ParameterSet& params);

  /// Adds the gradients of the bound leaves (as returned by bind()).
  void accumulate(const Gradients& grads, std::span<const Var> bound,
                  double weight = 1.0);
  void add(const GradientBuffer& other, double weight = 1.0);
  void scale(double factor);
  void zero();

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_.at(i); }
  const Tensor& operator[](std::size_t i) const { return grads_.at(i); }
  double global_norm() const;

 private:
  std::vector<Tensor> grads_;
};

/// Plain SGD with global-norm clipping. When the norm g over all trainable
/// gradients exceeds clip_norm the gradients are scaled by clip_norm / g.
/// Returns the pre-clipping norm.
double sgd_step(ParameterSet& params, const GradientBuffer& grads, double lr,
                double clip_norm);

/// Builds a scalar loss on `tape` from the leaves bound for each parameter.
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  std::size_t coordinates = 0;
};

/// Compares reverse-mode gradients with central differences on every scalar
/// of every trainable tensor. Relative error per coordinate is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// `params` is perturbed in place and restored before returning.
GradCheckResult finite_diff_check(const LossBuilder& build,
                                  ParameterSet& params, double eps = 1e-5);

}  // namespace unmt
