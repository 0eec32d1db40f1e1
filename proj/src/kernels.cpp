// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/kernels.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace s2s {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw ShapeError("matvec: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     " times vector of size " + std::to_string(v.size()));
  }
  return m * v;
}

double sigmoid(double x) {
  // Split on sign so the exponential never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector softmax(const Vector& v) {
  if (v.size() == 0) throw InputError("softmax: empty input");
  const double m = v.maxCoeff();
  if (!(m > -kInf)) throw InputError("softmax: all entries are -inf");
  Vector out(v.size());
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = v[i] == -kInf ? 0.0 : std::exp(v[i] - m);
    sum += out[i];
  }
  out /= sum;
  return out;
}

Vector log_softmax(const Vector& v) {
  if (v.size() == 0) throw InputError("log_softmax: empty input");
  const double m = v.maxCoeff();
  if (!(m > -kInf)) throw InputError("log_softmax: all entries are -inf");
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != -kInf) sum += std::exp(v[i] - m);
  }
  const double lse = m + std::log(sum);
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = v[i] == -kInf ? -kInf : v[i] - lse;
  return out;
}

CellState lstm_cell_step(const RecurrentCellParams& p, const Vector& x, const Vector& h_prev,
                         const Vector& c_prev) {
  const Index hidden = p.hidden_size();
  if (p.w_input.rows() != 4 * hidden || p.bias.size() != 4 * hidden) {
    throw ShapeError("lstm_cell_step: gate blocks disagree with hidden size " +
                     std::to_string(hidden));
  }
  if (x.size() != p.input_size()) {
    throw ShapeError("lstm_cell_step: input size " + std::to_string(x.size()) + ", expected " +
                     std::to_string(p.input_size()));
  }
  if (h_prev.size() != hidden || c_prev.size() != hidden) {
    throw ShapeError("lstm_cell_step: state size mismatch");
  }

  Vector gates = p.bias;
  gates.noalias() += p.w_input * x;
  gates.noalias() += p.w_recurrent * h_prev;

  CellState next{Vector(hidden), Vector(hidden)};
  for (Index j = 0; j < hidden; ++j) {
    const double i_gate = sigmoid(gates[j]);
    const double f_gate = sigmoid(gates[hidden + j]);
    const double g_cand = std::tanh(gates[2 * hidden + j]);
    const double o_gate = sigmoid(gates[3 * hidden + j]);
    next.c[j] = f_gate * c_prev[j] + i_gate * g_cand;
    next.h[j] = o_gate * std::tanh(next.c[j]);
  }
  return next;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double eps) {
  if (!(eps > 0.0)) throw InputError("finite_diff_grad: eps must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double hi = f(probe);
    probe[i] = orig - eps;
    const double lo = f(probe);
    probe[i] = orig;
    grad[i] = (hi - lo) / (2.0 * eps);
  }
  return grad;
}

}  // namespace s2s
