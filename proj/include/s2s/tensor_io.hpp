// Copyright 2026 the s2s-stream authors
// Versioned binary containers for weights and features, plus the plain-text
// corpus manifest.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "s2s/model.hpp"

namespace s2s {

inline constexpr std::uint32_t kWeightFormatVersion = 1;
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

// Self-describing flat tensor: dims plus row-major values.
struct NamedTensor {
  std::vector<Index> dims;
  std::vector<double> values;

  Index element_count() const;
};

using TensorMap = std::map<std::string, NamedTensor>;

NamedTensor tensor_from_matrix(const Matrix& m);
NamedTensor tensor_from_vector(const Vector& v);
Matrix matrix_from_tensor(const NamedTensor& t);
Vector vector_from_tensor(const NamedTensor& t);

// Weight container: magic, version, JSON config block, then named tensors as
// (name length, name, rank, dims, row-major 64-bit little-endian values).
void save_model(const std::string& path, const ModelParams& model);
ModelParams load_model(const std::string& path);

// Exposed for round-trip tests: the flattened tensor view of the weights.
TensorMap model_tensors(const ModelParams& model);

// Feature container: magic, version, frame period, one tensor record.
void save_features(const std::string& path, const FeatureSequence& feats);
FeatureSequence load_features(const std::string& path);

struct AlignmentSpan {
  double start_ms = 0.0;
  double end_ms = 0.0;
};

struct ManifestEntry {
  std::string utt_id;
  std::string feature_path;
  double duration_ms = 0.0;
  std::vector<int> tokens;
  std::vector<AlignmentSpan> alignment;  // one span per token
};

// Line-delimited records:
//   utt_id \t feature_path \t duration_ms \t tokens(space-separated) \t start:end;...
void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& path);

}  // namespace s2s
