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

#include "unmt/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unmt {

std::size_t ParameterSet::add(std::string name, Tensor value, bool trainable) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  trainable_.push_back(trainable ? 1 : 0);
  return values_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw std::out_of_range("unknown parameter '" + name + "'");
  }
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

std::vector<Var> ParameterSet::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    vars.push_back(tape.leaf(values_[i], trainable_[i] != 0));
  }
  return vars;
}

GradientBuffer::GradientBuffer(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& v = params.value(i);
    grads_.emplace_back(v.rows(), v.cols());
  }
}

void GradientBuffer::accumulate(const Gradients& grads,
                                std::span<const Var> bound, double weight) {
  if (bound.size() != grads_.size()) {
    throw std::invalid_argument("GradientBuffer::accumulate: " +
                                std::to_string(bound.size()) +
                                " bound leaves for " +
                                std::to_string(grads_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (!grads.has(bound[i])) continue;
    const Tensor& g = grads.of(bound[i]);
    auto dst = grads_[i].values();
    auto src = g.values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += weight * src[j];
  }
}

void GradientBuffer::add(const GradientBuffer& other, double weight) {
  if (other.grads_.size() != grads_.size()) {
    throw std::invalid_argument("GradientBuffer::add: size mismatch");
  }
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    if (!grads_[i].same_shape(other.grads_[i])) {
      throw std::invalid_argument("GradientBuffer::add: shape mismatch at " +
                                  std::to_string(i));
    }
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += weight * src[j];
  }
}

void GradientBuffer::scale(double factor) {
  for (auto& g : grads_)
    for (double& v : g.values()) v *= factor;
}

void GradientBuffer::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

double GradientBuffer::global_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) s += g.squared_norm();
  return std::sqrt(s);
}

double sgd_step(ParameterSet& params, const GradientBuffer& grads, double lr,
                double clip_norm) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: lr must be > 0");
  if (!(clip_norm > 0.0)) {
    throw std::invalid_argument("sgd_step: clip_norm must be > 0");
  }
  if (grads.size() != params.size()) {
    throw std::invalid_argument("sgd_step: " + std::to_string(grads.size()) +
                                " gradients for " +
                                std::to_string(params.size()) + " parameters");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!grads[i].same_shape(params.value(i))) {
      throw std::invalid_argument("sgd_step: gradient " + grads[i].shape_string() +
                                  " for parameter '" + params.name(i) + "' " +
                                  params.value(i).shape_string());
    }
    if (params.trainable(i)) sq += grads[i].squared_norm();
  }
  const double norm = std::sqrt(sq);
  const double factor = norm > clip_norm ? clip_norm / norm : 1.0;
  const double step = lr * factor;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params.trainable(i)) continue;
    auto p = params.value(i).values();
    auto g = grads[i].values();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= step * g[j];
  }
  return norm;
}

GradCheckResult finite_diff_check(const LossBuilder& build,
                                  ParameterSet& params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_check: eps <= 0");
  Tape tape;
  const auto bound = params.bind(tape);
  const Var loss = build(tape, bound);
  const Gradients grads = tape.backward(loss);

  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (!params.trainable(t)) continue;
    Tensor& value = params.value(t);
    const Tensor& analytic = grads.of(bound[t]);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      auto probe = [&](double x) {
        value[i] = x;
        try {
          tape.replay();
        } catch (const GraphError& e) {
          value[i] = saved;
          throw std::runtime_error("finite_diff_check: non-finite loss at " +
                                   params.name(t) + "[" + std::to_string(i) +
                                   "]: " + e.what());
        }
        return tape.value(loss)[0];
      };
      const double plus = probe(saved + eps);
      const double minus = probe(saved - eps);
      value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      ++result.coordinates;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = t;
        result.worst_index = i;
      }
    }
  }
  tape.replay();
  return result;
}

}  // namespace unmt
