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

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "unmt/params.hpp"
#include "unmt/tape.hpp"

using namespace unmt;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng,
                     double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(r, c);
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Loss builder over a single parameter tensor, for checking one primitive.
using Unary = std::function<Var(Tape&, Var)>;

double check_unary(const Unary& f, Tensor x) {
  ParameterSet ps;
  ps.add("x", std::move(x));
  const auto weights_seed = 99u;
  return finite_diff_check(
             [&](Tape& t, std::span<const Var> p) {
               // Random linear functional so every output coordinate matters.
               const Var y = f(t, p[0]);
               std::mt19937_64 rng(weights_seed);
               const Tensor& yv = t.value(y);
               const Var w = t.constant(random_tensor(yv.rows(), yv.cols(), rng));
               return t.sum(t.mul(y, w));
             },
             ps, 1e-5)
      .max_rel_error;
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
  Tape t;
  const Var x = t.constant(Tensor(1, 2));
  const Tensor& y = t.value(t.softmax_rows(x));
  CHECK(y[0] == 0.5);
  CHECK(y[1] == 0.5);
}

TEST_CASE("identity matmul returns its argument") {
  std::mt19937_64 rng(1);
  Tape t;
  const Tensor a = random_tensor(2, 5, rng);
  const Var out = t.matmul(t.constant(Tensor::identity(2)), t.constant(a));
  CHECK(t.value(out) == a);
}

TEST_CASE("tanh forward matches the math library value") {
  // std::tanh(0.5) frozen from an independent evaluation (Python math.tanh).
  Tape t;
  const Var y = t.tanh(t.constant(Tensor(1, 1, 0.5)));
  CHECK(t.value(y)[0] == doctest::Approx(0.46211715726000974).epsilon(1e-15));
}

TEST_CASE("gradient of a sum is all ones") {
  Tensor x = Tensor::from(1, 3, {0.3, -2.0, 7.5});
  Tape t;
  const Var xv = t.leaf(x, true);
  const Gradients g = t.backward(t.sum(xv));
  CHECK(g.of(xv) == Tensor(1, 3, 1.0));
}

TEST_CASE("gradient of a dot product is the other vector") {
  Tensor x = Tensor::from(1, 2, {1, 2});
  Tensor y = Tensor::from(1, 2, {3, 4});
  Tape t;
  const Var xv = t.leaf(x, true);
  const Var yv = t.leaf(y, true);
  const Gradients g = t.backward(t.sum(t.mul(xv, yv)));
  CHECK(g.of(xv) == y);
  CHECK(g.of(yv) == x);
}

TEST_CASE("unused leaves receive a zero gradient") {
  Tensor x(2, 2, 1.0);
  Tensor unused(3, 1, 4.0);
  Tape t;
  const Var xv = t.leaf(x, true);
  const Var uv = t.leaf(unused, true);
  const Gradients g = t.backward(t.sum(xv));
  CHECK(g.of(uv) == Tensor(3, 1));
}

TEST_CASE("backward rejects a non-scalar loss and foreign nodes") {
  Tensor x(2, 2, 1.0);
  Tape t;
  const Var xv = t.leaf(x, true);
  CHECK_THROWS_AS(t.backward(xv), GraphError);
  CHECK_THROWS_AS(t.backward(Var{42}), GraphError);
}

TEST_CASE("shape mismatches name the op and both shapes") {
  Tape t;
  const Var a = t.constant(Tensor(2, 3));
  const Var b = t.constant(Tensor(2, 3));
  try {
    t.matmul(a, b);
    FAIL("expected GraphError");
  } catch (const GraphError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("2x3 vs 2x3") != std::string::npos);
  }
  CHECK_THROWS_AS(t.add(a, t.constant(Tensor(3, 2))), GraphError);
  CHECK_THROWS_AS(t.add_row(a, t.constant(Tensor(1, 2))), GraphError);
}

TEST_CASE("non-finite inputs are rejected") {
  Tensor bad(1, 2, 0.0);
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  Tape t;
  CHECK_THROWS_AS(t.leaf(bad, true), GraphError);
  bad[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(t.constant(bad), GraphError);
}

TEST_CASE("every primitive agrees with central differences") {
  std::mt19937_64 rng(7);
  const Tensor w = random_tensor(4, 3, rng);
  const Tensor row = random_tensor(1, 4, rng);
  const Tensor other = random_tensor(3, 4, rng);
  const std::vector<int> ids{2, 0, 2};
  const std::vector<int> targets{1, 3, 0};
  const std::vector<std::uint8_t> mask{1, 0, 1};

  for (int trial = 0; trial < 3; ++trial) {
    const Tensor x = random_tensor(3, 4, rng);
    CAPTURE(trial);
    CHECK(check_unary([&](Tape& t, Var v) { return t.matmul(v, t.constant(w)); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.matmul(t.transpose(v), t.constant(other)); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.add(v, t.mul(v, v)); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.sub(t.constant(other), t.mul(v, v)); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.add_row(v, t.slice_rows(v, 1, 1)); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.tanh(v); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.sigmoid(v); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.softmax_rows(v); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) {
            const std::array<Var, 2> parts{v, t.tanh(v)};
            return t.hconcat(parts);
          }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) {
            const std::array<Var, 3> parts{v, t.slice_rows(v, 0, 2), t.sigmoid(v)};
            return t.vconcat(parts);
          }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.lookup(v, ids); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.slice_cols(v, 1, 2); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.scale(v, -2.5); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.cross_entropy(v, targets); }, x) < 1e-4);
    CHECK(check_unary([&](Tape& t, Var v) { return t.cross_entropy(v, targets, mask); }, x) < 1e-4);
  }
}

TEST_CASE("random three-layer composition passes the gradient check") {
  std::mt19937_64 rng(11);
  ParameterSet ps;
  ps.add("x", random_tensor(2, 5, rng));
  ps.add("w1", random_tensor(5, 6, rng, 0.5));
  ps.add("b1", random_tensor(1, 6, rng, 0.5));
  ps.add("w2", random_tensor(6, 4, rng, 0.5));
  ps.add("w3", random_tensor(4, 3, rng, 0.5));
  const std::vector<int> targets{2, 0};
  const auto r = finite_diff_check(
      [&](Tape& t, std::span<const Var> p) {
        const Var h1 = t.tanh(t.add_row(t.matmul(p[0], p[1]), p[2]));
        const Var h2 = t.sigmoid(t.matmul(h1, p[3]));
        return t.cross_entropy(t.matmul(h2, p[4]), targets);
      },
      ps, 1e-5);
  CHECK(r.coordinates == ps.scalar_count());
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("one GRU-style step with cross-entropy passes the gradient check") {
  std::mt19937_64 rng(3);
  const std::size_t h = 4;
  ParameterSet ps;
  ps.add("x", random_tensor(1, 3, rng));
  ps.add("h", random_tensor(1, h, rng));
  ps.add("W", random_tensor(3, 3 * h, rng, 0.5));
  ps.add("U", random_tensor(h, 3 * h, rng, 0.5));
  ps.add("b", random_tensor(1, 3 * h, rng, 0.5));
  ps.add("O", random_tensor(h, 5, rng, 0.5));
  const std::vector<int> target{3};
  const auto r = finite_diff_check(
      [&](Tape& t, std::span<const Var> p) {
        const Var xp = t.add_row(t.matmul(p[0], p[2]), p[4]);
        const Var hp = t.matmul(p[1], p[3]);
        const Var gates = t.sigmoid(t.add(t.slice_cols(xp, 0, 2 * h),
                                          t.slice_cols(hp, 0, 2 * h)));
        const Var rg = t.slice_cols(gates, 0, h);
        const Var z = t.slice_cols(gates, h, h);
        const Var n = t.tanh(t.add(t.slice_cols(xp, 2 * h, h),
                                   t.mul(rg, t.slice_cols(hp, 2 * h, h))));
        const Var next = t.add(n, t.mul(z, t.sub(p[1], n)));
        return t.cross_entropy(t.matmul(next, p[5]), target);
      },
      ps, 1e-5);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("quadratic and constant losses") {
  std::mt19937_64 rng(5);
  ParameterSet ps;
  ps.add("x", random_tensor(3, 3, rng));
  const auto quad = finite_diff_check(
      [](Tape& t, std::span<const Var> p) {
        return t.scale(t.sum(t.mul(p[0], p[0])), 0.5);
      },
      ps);
  CHECK(quad.max_rel_error < 1e-8);

  Tape t;
  const auto bound = ps.bind(t);
  const Var c = t.sum(t.constant(Tensor(1, 1, 3.0)));
  CHECK(t.backward(c).of(bound[0]) == Tensor(3, 3));
  const auto flat = finite_diff_check(
      [](Tape& tt, std::span<const Var>) {
        return tt.sum(tt.constant(Tensor(1, 1, 3.0)));
      },
      ps);
  CHECK(flat.max_rel_error == 0.0);
}

TEST_CASE("softmax rows are nonnegative and sum to one") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Tape t;
    const Tensor x = random_tensor(4, 7, rng, 30.0);
    const Tensor& y = t.value(t.softmax_rows(t.constant(x)));
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double s = 0.0;
      for (double v : y.row(i)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("backward is linear in the loss") {
  std::mt19937_64 rng(23);
  Tensor x = random_tensor(2, 3, rng);
  Tensor w = random_tensor(3, 3, rng);
  Tape t;
  const Var xv = t.leaf(x, true);
  const Var wv = t.leaf(w, true);
  const Var l1 = t.sum(t.tanh(t.matmul(xv, wv)));
  const Var l2 = t.sum(t.sigmoid(t.mul(xv, xv)));
  const Gradients g1 = t.backward(l1);
  const Gradients g2 = t.backward(l2);
  const Gradients g12 = t.backward(t.add(l1, l2));
  for (Var v : {xv, wv}) {
    const Tensor& a = g1.of(v);
    const Tensor& b = g2.of(v);
    const Tensor& c = g12.of(v);
    for (std::size_t i = 0; i < c.size(); ++i) {
      CHECK(std::abs(c[i] - (a[i] + b[i])) < 1e-10);
    }
  }
}

TEST_CASE("replay reproduces forward values bit for bit") {
  std::mt19937_64 rng(29);
  Tensor x = random_tensor(3, 4, rng);
  Tensor w = random_tensor(4, 4, rng);
  Tape t;
  const Var out = t.softmax_rows(
      t.tanh(t.matmul(t.leaf(x, true), t.leaf(w, true))));
  const Tensor before = t.value(out);
  t.replay();
  CHECK(t.value(out) == before);
}

TEST_CASE("sgd_step arithmetic and clipping") {
  ParameterSet ps;
  ps.add("p", Tensor(1, 1, 1.0));
  GradientBuffer g(ps);
  sgd_step(ps, g, 0.1, 10.0);
  CHECK(ps.value(0)[0] == 1.0);

  g[0][0] = 0.5;
  sgd_step(ps, g, 0.1, 10.0);
  CHECK(ps.value(0)[0] == doctest::Approx(0.95).epsilon(1e-15));

  ParameterSet q;
  q.add("a", Tensor(1, 2, 0.0));
  GradientBuffer gq(q);
  gq[0][0] = 12.0;
  gq[0][1] = 16.0;  // norm 20
  const double norm = sgd_step(q, gq, 1.0, 10.0);
  CHECK(norm == doctest::Approx(20.0));
  CHECK(q.value(0)[0] == doctest::Approx(-6.0));
  CHECK(q.value(0)[1] == doctest::Approx(-8.0));
}

TEST_CASE("sgd_step rejects bad arguments and skips frozen tensors") {
  ParameterSet ps;
  ps.add("p", Tensor(1, 2, 1.0));
  ps.add("frozen", Tensor(1, 1, 1.0), false);
  GradientBuffer g(ps);
  g[0].fill(1.0);
  g[1].fill(1.0);
  CHECK_THROWS_AS(sgd_step(ps, g, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(ps, g, 0.1, 0.0), std::invalid_argument);
  sgd_step(ps, g, 0.5, 100.0);
  CHECK(ps.value(1)[0] == 1.0);
  CHECK(ps.value(0)[0] == 0.5);

  ParameterSet other;
  other.add("p", Tensor(2, 2));
  CHECK_THROWS_AS(sgd_step(other, g, 0.1, 1.0), std::invalid_argument);
}
