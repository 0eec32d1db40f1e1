// Copyright 2026 the s2s-stream authors
// Attention-mass endpoint detection for partial hypotheses.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "s2s/errors.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Endpoint tracking state for one hypothesis prefix. `t_c` is the covering
// endpoint observed on the most recent update (-1 before the first one);
// `fixed` is sticky: once the endpoint has been declared stable it stays so.
struct EndpointState {
  Index t_c = -1;
  Index last_observed_t = 0;
  bool fixed = false;
};

// Smallest frame index whose cumulative attention mass reaches theta.
// theta must lie in (0, 1]. With theta == 1 this is the last frame carrying
// nonzero mass. attn must be non-empty with nonnegative entries.
Index covering_endpoint(const Vector& attn, double theta);

// Re-evaluates the covering endpoint against a fresh attention vector over
// `t` total frames and updates fixation: the endpoint becomes fixed when it
// trails the frontier by more than delta (t_c < t - delta) AND is unchanged
// since the previous observation. delta may be infinity (never fixes).
// Throws InputError when t decreases or attn length differs from t.
EndpointState update_fixation(const EndpointState& state, const Vector& new_attn, Index t,
                              double theta, double delta);

}  // namespace s2s
