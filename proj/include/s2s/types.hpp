// Copyright 2026 the s2s-stream authors
// Core dense types shared by every module.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <Eigen/Core>

namespace s2s {

// All numeric state is dense, row-major, 64-bit. Row-major keeps the
// serialized tensor layout identical to the in-memory layout.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace s2s
