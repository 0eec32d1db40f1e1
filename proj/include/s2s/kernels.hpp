// Copyright 2026 the s2s-stream authors
// Numeric primitives every other module builds on.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <functional>
#include <utility>

#include "s2s/errors.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Parameters of one recurrent (LSTM) cell. The four gates are stored stacked
// along the row dimension in the fixed order [input; forget; candidate;
// output], i.e. w_input has 4H rows for hidden size H.
struct RecurrentCellParams {
  Matrix w_input;      // 4H x input_size
  Matrix w_recurrent;  // 4H x H
  Vector bias;         // 4H

  Index hidden_size() const { return w_recurrent.cols(); }
  Index input_size() const { return w_input.cols(); }
};

struct CellState {
  Vector h;
  Vector c;
};

// m (r x c) times v (c) -> r. Throws ShapeError on mismatch.
Vector matvec(const Matrix& m, const Vector& v);

double sigmoid(double x);

// Numerically stabilized softmax (max-subtraction). Entries equal to -inf map
// to exactly zero; throws InputError when every entry is -inf or v is empty.
Vector softmax(const Vector& v);

// log(softmax(v)) with the same stabilization; -inf entries stay -inf.
Vector log_softmax(const Vector& v);

// One LSTM cell step:
//   [i; f; g; o] = w_input*x + w_recurrent*h_prev + bias
//   c = sigmoid(f) .* c_prev + sigmoid(i) .* tanh(g)
//   h = sigmoid(o) .* tanh(c)
CellState lstm_cell_step(const RecurrentCellParams& p, const Vector& x, const Vector& h_prev,
                         const Vector& c_prev);

// Central finite differences: grad_i = (f(x + eps e_i) - f(x - eps e_i)) / 2eps.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double eps = 1e-6);

}  // namespace s2s
