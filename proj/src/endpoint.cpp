// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/endpoint.hpp"

#include <string>

namespace s2s {

namespace {
// Slack for accumulated rounding when the running sum approaches theta; keeps
// theta == 1.0 reachable on float-normalized attention vectors.
constexpr double kSumSlack = 1e-12;
}  // namespace

Index covering_endpoint(const Vector& attn, double theta) {
  if (attn.size() == 0) throw InputError("covering_endpoint: empty attention");
  if (!(theta > 0.0) || theta > 1.0) {
    throw InputError("covering_endpoint: theta must be in (0, 1], got " + std::to_string(theta));
  }
  double cum = 0.0;
  Index last_nonzero = 0;
  for (Index i = 0; i < attn.size(); ++i) {
    if (attn[i] < 0.0) throw InputError("covering_endpoint: negative attention mass");
    cum += attn[i];
    if (attn[i] > 0.0) last_nonzero = i;
    if (cum >= theta - kSumSlack) return i;
  }
  // The total mass fell short of theta (possible only through rounding or an
  // unnormalized input); the covering frame is the last one contributing mass.
  return last_nonzero;
}

EndpointState update_fixation(const EndpointState& state, const Vector& new_attn, Index t,
                              double theta, double delta) {
  if (t < state.last_observed_t) {
    throw InputError("update_fixation: frontier moved backwards (" + std::to_string(t) + " < " +
                     std::to_string(state.last_observed_t) + ")");
  }
  if (new_attn.size() != t) {
    throw InputError("update_fixation: attention covers " + std::to_string(new_attn.size()) +
                     " frames, frontier is " + std::to_string(t));
  }
  if (delta < 0.0) throw InputError("update_fixation: negative delta");

  EndpointState next = state;
  next.t_c = covering_endpoint(new_attn, theta);
  next.last_observed_t = t;
  // Sticky: once fixed, stays fixed even if the endpoint later drifts.
  if (!next.fixed) {
    const bool trails = static_cast<double>(next.t_c) < static_cast<double>(t) - delta;
    const bool unchanged = state.t_c >= 0 && next.t_c == state.t_c;
    next.fixed = trails && unchanged;
  }
  return next;
}

}  // namespace s2s
