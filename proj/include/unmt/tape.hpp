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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "unmt/tensor.hpp"

namespace unmt {

enum class Op : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kAddRow,  // (r x c) + (1 x c) broadcast over rows
  kTanh,
  kSigmoid,
  kMul,
  kSoftmaxRows,
  kHConcat,
  kVConcat,
  kLookup,        // rows of an embedding table
  kCrossEntropy,  // masked mean token NLL over softmax rows
  kSliceCols,
  kSliceRows,
  kTranspose,
  kSum,
  kScale,
};

std::string_view op_name(Op op);

/// Raised for malformed graphs: shape mismatches, non-finite values, bad ids.
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  int id = -1;
};

class Gradients;

/// Records primitive applications in topological order and differentiates
/// them in reverse. A tape is single-threaded; independent tapes share
/// nothing and may run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Leaf that reads `value` by reference. The referenced tensor must outlive
  /// the tape; replay() re-reads it, which is how finite differences probe.
  Var leaf(const Tensor& value, bool requires_grad);
  /// Leaf owning a copy of `value`, never differentiated.
  Var constant(Tensor value);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_row(Var a, Var row);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var mul(Var a, Var b);
  Var softmax_rows(Var a);
  Var hconcat(std::span<const Var> parts);
  Var vconcat(std::span<const Var> parts);
  Var lookup(Var table, std::span<const int> ids);
  /// Mean over unmasked rows of -log softmax(logits)[row, target].
  /// An empty mask means every row counts.
  Var cross_entropy(Var logits, std::span<const int> targets,
                    std::span<const std::uint8_t> mask = {});
  Var slice_cols(Var a, std::size_t offset, std::size_t count);
  Var slice_rows(Var a, std::size_t offset, std::size_t count);
  Var transpose(Var a);
  Var sum(Var a);
  Var scale(Var a, double factor);

  const Tensor& value(Var v) const;
  Op op(Var v) const { return node(v).op; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool is_leaf(Var v) const { return node(v).op == Op::kLeaf; }

  /// Reverse sweep from a 1x1 loss. Every leaf gets a gradient tensor (zeros
  /// when the loss does not depend on it).
  Gradients backward(Var loss) const;

  /// Recomputes every non-leaf value in recording order.
  void replay();

 private:
  struct Node {
    Op op = Op::kLeaf;
    bool requires_grad = false;
    std::vector<int> inputs;
    Tensor value;
    const Tensor* external = nullptr;
    std::vector<int> ints;            // lookup ids / CE targets
    std::vector<std::uint8_t> mask;   // CE mask
    std::size_t offset = 0;           // slices
    std::size_t count = 0;            // slices
    double factor = 1.0;              // scale
    Tensor cache;                     // CE softmax probabilities
  };

  const Node& node(Var v) const;
  Var push(Node n);
  void compute(Node& n);
  const Tensor& val(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }

  std::vector<Node> nodes_;
};

/// Gradient map produced by Tape::backward, indexed by node id.
class Gradients {
 public:
  const Tensor& of(Var v) const;
  bool has(Var v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<std::uint8_t> present_;
};

}  // namespace unmt
