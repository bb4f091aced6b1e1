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

#include "unmt/tape.hpp"

#include <algorithm>
#include <cmath>

#include "unmt/kernels.hpp"

namespace unmt {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kAddRow: return "add_row";
    case Op::kTanh: return "tanh";
    case Op::kSigmoid: return "sigmoid";
    case Op::kMul: return "mul";
    case Op::kSoftmaxRows: return "softmax_rows";
    case Op::kHConcat: return "hconcat";
    case Op::kVConcat: return "vconcat";
    case Op::kLookup: return "lookup";
    case Op::kCrossEntropy: return "cross_entropy";
    case Op::kSliceCols: return "slice_cols";
    case Op::kSliceRows: return "slice_rows";
    case Op::kTranspose: return "transpose";
    case Op::kSum: return "sum";
    case Op::kScale: return "scale";
  }
  return "?";
}

namespace {

[[noreturn]] void shape_error(Op op, const Tensor& a, const Tensor& b) {
  throw GraphError(std::string(op_name(op)) + ": shape mismatch " +
                   a.shape_string() + " vs " + b.shape_string());
}

double sigmoid_scalar(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_row(std::span<const double> in, std::span<double> out) {
  const double mx = *std::max_element(in.begin(), in.end());
  double z = 0.0;
  for (std::size_t j = 0; j < in.size(); ++j) {
    out[j] = std::exp(in[j] - mx);
    z += out[j];
  }
  const double inv = 1.0 / z;
  for (double& v : out) v *= inv;
}

void add_into(Tensor& dst, const Tensor& src) {
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("node " + std::to_string(v.id) + " is not on this tape");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const {
  node(v);
  return val(v.id);
}

Var Tape::push(Node n) {
  for (int in : n.inputs) {
    if (in < 0 || static_cast<std::size_t>(in) >= nodes_.size()) {
      throw GraphError(std::string(op_name(n.op)) + ": input node " +
                       std::to_string(in) + " is not on this tape");
    }
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  compute(n);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::leaf(const Tensor& value, bool requires_grad) {
  if (!value.all_finite()) {
    throw GraphError("leaf: non-finite input " + value.shape_string());
  }
  Node n;
  n.op = Op::kLeaf;
  n.requires_grad = requires_grad;
  n.external = &value;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) {
    throw GraphError("constant: non-finite input " + value.shape_string());
  }
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::kMatMul;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}
Var Tape::add(Var a, Var b) {
  Node n;
  n.op = Op::kAdd;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}
Var Tape::sub(Var a, Var b) {
  Node n;
  n.op = Op::kSub;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}
Var Tape::add_row(Var a, Var row) {
  Node n;
  n.op = Op::kAddRow;
  n.inputs = {a.id, row.id};
  return push(std::move(n));
}
Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.inputs = {a.id};
  return push(std::move(n));
}
Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.inputs = {a.id};
  return push(std::move(n));
}
Var Tape::mul(Var a, Var b) {
  Node n;
  n.op = Op::kMul;
  n.inputs = {a.id, b.id};
  return push(std::move(n));
}
Var Tape::softmax_rows(Var a) {
  Node n;
  n.op = Op::kSoftmaxRows;
  n.inputs = {a.id};
  return push(std::move(n));
}
Var Tape::hconcat(std::span<const Var> parts) {
  if (parts.empty()) throw GraphError("hconcat: no inputs");
  Node n;
  n.op = Op::kHConcat;
  for (Var p : parts) n.inputs.push_back(p.id);
  return push(std::move(n));
}
Var Tape::vconcat(std::span<const Var> parts) {
  if (parts.empty()) throw GraphError("vconcat: no inputs");
  Node n;
  n.op = Op::kVConcat;
  for (Var p : parts) n.inputs.push_back(p.id);
  return push(std::move(n));
}
Var Tape::lookup(Var table, std::span<const int> ids) {
  Node n;
  n.op = Op::kLookup;
  n.inputs = {table.id};
  n.ints.assign(ids.begin(), ids.end());
  return push(std::move(n));
}
Var Tape::cross_entropy(Var logits, std::span<const int> targets,
                        std::span<const std::uint8_t> mask) {
  Node n;
  n.op = Op::kCrossEntropy;
  n.inputs = {logits.id};
  n.ints.assign(targets.begin(), targets.end());
  n.mask.assign(mask.begin(), mask.end());
  return push(std::move(n));
}
Var Tape::slice_cols(Var a, std::size_t offset, std::size_t count) {
  Node n;
  n.op = Op::kSliceCols;
  n.inputs = {a.id};
  n.offset = offset;
  n.count = count;
  return push(std::move(n));
}
Var Tape::slice_rows(Var a, std::size_t offset, std::size_t count) {
  Node n;
  n.op = Op::kSliceRows;
  n.inputs = {a.id};
  n.offset = offset;
  n.count = count;
  return push(std::move(n));
}
Var Tape::transpose(Var a) {
  Node n;
  n.op = Op::kTranspose;
  n.inputs = {a.id};
  return push(std::move(n));
}
Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.inputs = {a.id};
  return push(std::move(n));
}
Var Tape::scale(Var a, double factor) {
  if (!std::isfinite(factor)) throw GraphError("scale: non-finite factor");
  Node n;
  n.op = Op::kScale;
  n.inputs = {a.id};
  n.factor = factor;
  return push(std::move(n));
}

void Tape::compute(Node& n) {
  auto in = [&](std::size_t k) -> const Tensor& { return val(n.inputs[k]); };
  Tensor& out = n.value;
  switch (n.op) {
    case Op::kLeaf:
      return;
    case Op::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (a.cols() != b.rows()) shape_error(n.op, a, b);
      out = Tensor(a.rows(), b.cols());
      kernels::serial::gemm_nn(a, b, out);
      break;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (!a.same_shape(b)) shape_error(n.op, a, b);
      out = a;
      auto o = out.values();
      auto bv = b.values();
      if (n.op == Op::kAdd) {
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
      } else if (n.op == Op::kSub) {
        for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
      } else {
        for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
      }
      break;
    }
    case Op::kAddRow: {
      const Tensor& a = in(0);
      const Tensor& r = in(1);
      if (r.rows() != 1 || r.cols() != a.cols()) shape_error(n.op, a, r);
      out = a;
      for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += r[j];
      }
      break;
    }
    case Op::kTanh: {
      out = in(0);
      for (double& v : out.values()) v = std::tanh(v);
      break;
    }
    case Op::kSigmoid: {
      out = in(0);
      for (double& v : out.values()) v = sigmoid_scalar(v);
      break;
    }
    case Op::kSoftmaxRows: {
      const Tensor& a = in(0);
      out = Tensor(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.rows(); ++i) softmax_row(a.row(i), out.row(i));
      break;
    }
    case Op::kHConcat: {
      const std::size_t rows = in(0).rows();
      std::size_t cols = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (in(k).rows() != rows) shape_error(n.op, in(0), in(k));
        cols += in(k).cols();
      }
      out = Tensor(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        auto dst = out.row(i);
        std::size_t off = 0;
        for (std::size_t k = 0; k < n.inputs.size(); ++k) {
          auto src = in(k).row(i);
          std::copy(src.begin(), src.end(), dst.begin() + off);
          off += src.size();
        }
      }
      break;
    }
    case Op::kVConcat: {
      const std::size_t cols = in(0).cols();
      std::size_t rows = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (in(k).cols() != cols) shape_error(n.op, in(0), in(k));
        rows += in(k).rows();
      }
      out = Tensor(rows, cols);
      auto dst = out.values();
      std::size_t off = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        auto src = in(k).values();
        std::copy(src.begin(), src.end(), dst.begin() + off);
        off += src.size();
      }
      break;
    }
    case Op::kLookup: {
      const Tensor& table = in(0);
      out = Tensor(n.ints.size(), table.cols());
      for (std::size_t i = 0; i < n.ints.size(); ++i) {
        const int id = n.ints[i];
        if (id < 0 || static_cast<std::size_t>(id) >= table.rows()) {
          throw GraphError("lookup: id " + std::to_string(id) +
                           " outside table " + table.shape_string());
        }
        auto src = table.row(static_cast<std::size_t>(id));
        std::copy(src.begin(), src.end(), out.row(i).begin());
      }
      break;
    }
    case Op::kCrossEntropy: {
      const Tensor& logits = in(0);
      if (n.ints.size() != logits.rows()) {
        throw GraphError("cross_entropy: " + std::to_string(n.ints.size()) +
                         " targets for logits " + logits.shape_string());
      }
      if (!n.mask.empty() && n.mask.size() != logits.rows()) {
        throw GraphError("cross_entropy: mask length " +
                         std::to_string(n.mask.size()) + " for logits " +
                         logits.shape_string());
      }
      n.cache = Tensor(logits.rows(), logits.cols());
      double total = 0.0;
      std::size_t counted = 0;
      for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (!n.mask.empty() && !n.mask[i]) continue;
        const int t = n.ints[i];
        if (t < 0 || static_cast<std::size_t>(t) >= logits.cols()) {
          throw GraphError("cross_entropy: target " + std::to_string(t) +
                           " outside " + std::to_string(logits.cols()) +
                           " classes");
        }
        softmax_row(logits.row(i), n.cache.row(i));
        const auto row = logits.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double v : row) z += std::exp(v - mx);
        total += (std::log(z) + mx) - row[static_cast<std::size_t>(t)];
        ++counted;
      }
      out = Tensor(1, 1, counted ? total / static_cast<double>(counted) : 0.0);
      n.count = counted;
      break;
    }
    case Op::kSliceCols: {
      const Tensor& a = in(0);
      if (n.offset + n.count > a.cols() || n.count == 0) {
        throw GraphError("slice_cols: [" + std::to_string(n.offset) + ", +" +
                         std::to_string(n.count) + ") of " + a.shape_string());
      }
      out = Tensor(a.rows(), n.count);
      for (std::size_t i = 0; i < a.rows(); ++i) {
        auto src = a.row(i).subspan(n.offset, n.count);
        std::copy(src.begin(), src.end(), out.row(i).begin());
      }
      break;
    }
    case Op::kSliceRows: {
      const Tensor& a = in(0);
      if (n.offset + n.count > a.rows() || n.count == 0) {
        throw GraphError("slice_rows: [" + std::to_string(n.offset) + ", +" +
                         std::to_string(n.count) + ") of " + a.shape_string());
      }
      out = Tensor(n.count, a.cols());
      auto src = a.values().subspan(n.offset * a.cols(), n.count * a.cols());
      std::copy(src.begin(), src.end(), out.values().begin());
      break;
    }
    case Op::kTranspose: {
      const Tensor& a = in(0);
      out = Tensor(a.cols(), a.rows());
      for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
      break;
    }
    case Op::kSum: {
      double s = 0.0;
      for (double v : in(0).values()) s += v;
      out = Tensor(1, 1, s);
      break;
    }
    case Op::kScale: {
      out = in(0);
      for (double& v : out.values()) v *= n.factor;
      break;
    }
  }
  if (!out.all_finite()) {
    throw GraphError(std::string(op_name(n.op)) + ": non-finite output " +
                     out.shape_string());
  }
}

void Tape::replay() {
  for (Node& n : nodes_) {
    if (n.op != Op::kLeaf) compute(n);
  }
}

Gradients Tape::backward(Var loss) const {
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw GraphError("backward: loss must be 1x1, got " + lv.shape_string());
  }
  Gradients g;
  const std::size_t count = static_cast<std::size_t>(loss.id) + 1;
  g.grads_.resize(nodes_.size());
  g.present_.assign(nodes_.size(), 0);

  auto grad_of = [&](int id) -> Tensor& {
    auto idx = static_cast<std::size_t>(id);
    if (!g.present_[idx]) {
      const Tensor& v = val(id);
      g.grads_[idx] = Tensor(v.rows(), v.cols());
      g.present_[idx] = 1;
    }
    return g.grads_[idx];
  };
  auto wants = [&](int id) {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
  };

  if (nodes_[static_cast<std::size_t>(loss.id)].requires_grad) {
    grad_of(loss.id)[0] = 1.0;
  }

  for (std::size_t idx = count; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (n.op == Op::kLeaf || !n.requires_grad || !g.present_[idx]) continue;
    const Tensor& dy = g.grads_[idx];
    const Tensor& y = n.value;
    auto in = [&](std::size_t k) -> const Tensor& { return val(n.inputs[k]); };
    const int a_id = n.inputs[0];

    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        if (wants(a_id)) kernels::serial::gemm_nt(dy, in(1), grad_of(a_id));
        if (wants(n.inputs[1]))
          kernels::serial::gemm_tn(in(0), dy, grad_of(n.inputs[1]));
        break;
      }
      case Op::kAdd:
        if (wants(a_id)) add_into(grad_of(a_id), dy);
        if (wants(n.inputs[1])) add_into(grad_of(n.inputs[1]), dy);
        break;
      case Op::kSub:
        if (wants(a_id)) add_into(grad_of(a_id), dy);
        if (wants(n.inputs[1])) {
          auto d = grad_of(n.inputs[1]).values();
          auto s = dy.values();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
        }
        break;
      case Op::kAddRow:
        if (wants(a_id)) add_into(grad_of(a_id), dy);
        if (wants(n.inputs[1])) {
          Tensor& gr = grad_of(n.inputs[1]);
          for (std::size_t i = 0; i < dy.rows(); ++i) {
            auto row = dy.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) gr[j] += row[j];
          }
        }
        break;
      case Op::kTanh:
        if (wants(a_id)) {
          auto d = grad_of(a_id).values();
          for (std::size_t i = 0; i < d.size(); ++i)
            d[i] += dy[i] * (1.0 - y[i] * y[i]);
        }
        break;
      case Op::kSigmoid:
        if (wants(a_id)) {
          auto d = grad_of(a_id).values();
          for (std::size_t i = 0; i < d.size(); ++i)
            d[i] += dy[i] * y[i] * (1.0 - y[i]);
        }
        break;
      case Op::kMul: {
        const Tensor& a = in(0);
        const Tensor& b = in(1);
        if (wants(a_id)) {
          auto d = grad_of(a_id).values();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * b[i];
        }
        if (wants(n.inputs[1])) {
          auto d = grad_of(n.inputs[1]).values();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * a[i];
        }
        break;
      }
      case Op::kSoftmaxRows:
        if (wants(a_id)) {
          Tensor& ga = grad_of(a_id);
          for (std::size_t i = 0; i < y.rows(); ++i) {
            auto yr = y.row(i);
            auto dr = dy.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * dr[j];
            auto gr = ga.row(i);
            for (std::size_t j = 0; j < yr.size(); ++j)
              gr[j] += yr[j] * (dr[j] - dot);
          }
        }
        break;
      case Op::kHConcat: {
        std::size_t off = 0;
        for (int id : n.inputs) {
          const std::size_t c = val(id).cols();
          if (wants(id)) {
            Tensor& gi = grad_of(id);
            for (std::size_t i = 0; i < dy.rows(); ++i) {
              auto src = dy.row(i).subspan(off, c);
              auto dst = gi.row(i);
              for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
            }
          }
          off += c;
        }
        break;
      }
      case Op::kVConcat: {
        std::size_t off = 0;
        for (int id : n.inputs) {
          const std::size_t sz = val(id).size();
          if (wants(id)) {
            auto dst = grad_of(id).values();
            auto src = dy.values().subspan(off, sz);
            for (std::size_t j = 0; j < sz; ++j) dst[j] += src[j];
          }
          off += sz;
        }
        break;
      }
      case Op::kLookup:
        if (wants(a_id)) {
          Tensor& gt = grad_of(a_id);
          for (std::size_t i = 0; i < n.ints.size(); ++i) {
            auto dst = gt.row(static_cast<std::size_t>(n.ints[i]));
            auto src = dy.row(i);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
          }
        }
        break;
      case Op::kCrossEntropy:
        if (wants(a_id) && n.count > 0) {
          Tensor& gl = grad_of(a_id);
          const double w = dy[0] / static_cast<double>(n.count);
          for (std::size_t i = 0; i < gl.rows(); ++i) {
            if (!n.mask.empty() && !n.mask[i]) continue;
            auto p = n.cache.row(i);
            auto dst = gl.row(i);
            for (std::size_t j = 0; j < p.size(); ++j) dst[j] += w * p[j];
            dst[static_cast<std::size_t>(n.ints[i])] -= w;
          }
        }
        break;
      case Op::kSliceCols:
        if (wants(a_id)) {
          Tensor& ga = grad_of(a_id);
          for (std::size_t i = 0; i < dy.rows(); ++i) {
            auto dst = ga.row(i).subspan(n.offset, n.count);
            auto src = dy.row(i);
            for (std::size_t j = 0; j < n.count; ++j) dst[j] += src[j];
          }
        }
        break;
      case Op::kSliceRows:
        if (wants(a_id)) {
          Tensor& ga = grad_of(a_id);
          auto dst = ga.values().subspan(n.offset * ga.cols(), dy.size());
          auto src = dy.values();
          for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
        }
        break;
      case Op::kTranspose:
        if (wants(a_id)) {
          Tensor& ga = grad_of(a_id);
          for (std::size_t i = 0; i < dy.rows(); ++i)
            for (std::size_t j = 0; j < dy.cols(); ++j) ga(j, i) += dy(i, j);
        }
        break;
      case Op::kSum:
        if (wants(a_id)) {
          for (double& v : grad_of(a_id).values()) v += dy[0];
        }
        break;
      case Op::kScale:
        if (wants(a_id)) {
          auto d = grad_of(a_id).values();
          for (std::size_t i = 0; i < d.size(); ++i) d[i] += n.factor * dy[i];
        }
        break;
    }
  }

  // Leaves always carry a gradient, zero when unreachable from the loss.
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    if (nodes_[idx].op == Op::kLeaf && nodes_[idx].requires_grad &&
        !g.present_[idx]) {
      grad_of(static_cast<int>(idx));
    }
  }
  return g;
}

const Tensor& Gradients::of(Var v) const {
  if (!has(v)) {
    throw GraphError("no gradient recorded for node " + std::to_string(v.id));
  }
  return grads_[static_cast<std::size_t>(v.id)];
}

bool Gradients::has(Var v) const {
  return v.id >= 0 && static_cast<std::size_t>(v.id) < grads_.size() &&
         present_[static_cast<std::size_t>(v.id)];
}

}  // namespace unmt
