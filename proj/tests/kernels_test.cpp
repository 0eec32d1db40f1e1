// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include <cmath>

#include <doctest.h>

#include "s2s/kernels.hpp"
#include "s2s/rng.hpp"

using namespace s2s;

namespace {

// Scalar single-channel LSTM written independently of the production cell.
struct ScalarLstm {
  double wi, wf, wg, wo;  // input weights
  double ui, uf, ug, uo;  // recurrent weights
  double bi, bf, bg, bo;  // biases

  std::pair<double, double> step(double x, double h, double c) const {
    const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double i = sig(wi * x + ui * h + bi);
    const double f = sig(wf * x + uf * h + bf);
    const double g = std::tanh(wg * x + ug * h + bg);
    const double o = sig(wo * x + uo * h + bo);
    const double c_new = f * c + i * g;
    return {o * std::tanh(c_new), c_new};
  }
};

RecurrentCellParams pack_scalar(const ScalarLstm& s) {
  RecurrentCellParams p;
  p.w_input = Matrix(4, 1);
  p.w_input << s.wi, s.wf, s.wg, s.wo;
  p.w_recurrent = Matrix(4, 1);
  p.w_recurrent << s.ui, s.uf, s.ug, s.uo;
  p.bias = Vector(4);
  p.bias << s.bi, s.bf, s.bg, s.bo;
  return p;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("sigmoid endpoints and saturation") {
  CHECK(sigmoid(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid(40.0) == doctest::Approx(1.0));
  CHECK(sigmoid(-40.0) == doctest::Approx(0.0));
  // Deep negative saturation underflows to exactly zero: construction code
  // relies on this to kill gates bit-exactly.
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(1000.0) == 1.0);
}

TEST_CASE("softmax pinned values") {
  Vector v(2);
  v << 0.0, std::log(2.0);
  const Vector s = softmax(v);
  CHECK(s[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax maps -inf to exactly zero") {
  Vector v(3);
  v << 1.0, -std::numeric_limits<double>::infinity(), 2.0;
  const Vector s = softmax(v);
  CHECK(s[1] == 0.0);
  CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax rejects empty and all-masked input") {
  CHECK_THROWS_AS(softmax(Vector(0)), InputError);
  Vector v = Vector::Constant(3, -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(softmax(v), InputError);
}

TEST_CASE("softmax is shift invariant") {
  Rng rng(11);
  Vector v = rng.gaussian_vector(9);
  const Vector a = softmax(v);
  const Vector b = softmax((v.array() + 123.5).matrix());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log_softmax normalizes and keeps -inf") {
  Vector v(3);
  v << 0.3, -std::numeric_limits<double>::infinity(), -0.7;
  const Vector ls = log_softmax(v);
  CHECK(std::isinf(ls[1]));
  CHECK(ls[1] < 0);
  double total = 0.0;
  for (Index i = 0; i < ls.size(); ++i) total += std::exp(ls[i]);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("matvec validates shape") {
  Matrix m = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(matvec(m, Vector::Zero(2)), ShapeError);
  CHECK(matvec(m, Vector::Zero(3)).size() == 2);
}

TEST_CASE("zero-parameter cell pinned step") {
  RecurrentCellParams p;
  p.w_input = Matrix::Zero(4, 1);
  p.w_recurrent = Matrix::Zero(4, 1);
  p.bias = Vector::Zero(4);
  const CellState out = lstm_cell_step(p, Vector::Ones(1), Vector::Zero(1), Vector::Ones(1));
  // i=f=o=0.5, g=0: c = 0.5*1, h = 0.5*tanh(0.5)
  CHECK(out.c[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(out.h[0] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
}

TEST_CASE("cell matches the scalar oracle over a trajectory") {
  Rng rng(71);
  ScalarLstm s{rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian(),
               rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian(),
               rng.gaussian(), rng.gaussian(), rng.gaussian(), rng.gaussian()};
  const RecurrentCellParams p = pack_scalar(s);
  double h = 0.0, c = 0.0;
  Vector hv = Vector::Zero(1), cv = Vector::Zero(1);
  for (int t = 0; t < 24; ++t) {
    const double x = rng.gaussian();
    const auto [h2, c2] = s.step(x, h, c);
    const CellState out = lstm_cell_step(p, Vector::Constant(1, x), hv, cv);
    CHECK(out.h[0] == doctest::Approx(h2).epsilon(1e-12));
    CHECK(out.c[0] == doctest::Approx(c2).epsilon(1e-12));
    h = h2;
    c = c2;
    hv = out.h;
    cv = out.c;
  }
}

TEST_CASE("killed forget gate erases the carry exactly") {
  RecurrentCellParams p;
  p.w_input = Matrix::Zero(4, 1);
  p.w_recurrent = Matrix::Zero(4, 1);
  p.bias = Vector::Zero(4);
  p.bias[1] = -1000.0;  // forget gate
  const CellState a = lstm_cell_step(p, Vector::Zero(1), Vector::Zero(1), Vector::Constant(1, 5.0));
  const CellState b = lstm_cell_step(p, Vector::Zero(1), Vector::Zero(1), Vector::Constant(1, -3.0));
  CHECK(a.c[0] == b.c[0]);
  CHECK(a.c[0] == 0.0);
}

TEST_CASE("finite differences recover a quadratic gradient") {
  const auto f = [](const Vector& x) { return x.squaredNorm(); };
  Rng rng(5);
  const Vector x = rng.gaussian_vector(6);
  const Vector g = finite_diff_grad(f, x);
  CHECK((g - 2.0 * x).cwiseAbs().maxCoeff() < 1e-6);
}

}  // TEST_SUITE
