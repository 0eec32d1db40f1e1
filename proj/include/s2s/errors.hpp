// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace s2s {

// Dimension disagreements between operands.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error("shape error: " + what) {}
};

// Structurally invalid configuration (or weights that do not match it).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error("config error: " + what) {}
};

// Invalid runtime input (bad file, non-monotone stream, out-of-range value).
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error("input error: " + what) {}
};

// Violated invariant inside the decoding search.
struct SearchError : std::runtime_error {
  explicit SearchError(const std::string& what) : std::runtime_error("search error: " + what) {}
};

}  // namespace s2s
