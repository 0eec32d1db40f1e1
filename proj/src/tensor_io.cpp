// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/tensor_io.hpp"

#include <bit>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace s2s {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container values are little-endian; big-endian hosts need swapping");

constexpr char kWeightMagic[4] = {'S', '2', 'S', 'W'};
constexpr char kFeatureMagic[4] = {'S', '2', 'S', 'F'};

void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!os) throw InputError("write failed");
}

void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, &v, sizeof v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_bytes(os, &v, sizeof v); }
void write_f64(std::ostream& os, double v) { write_bytes(os, &v, sizeof v); }

void read_bytes(std::istream& is, void* data, std::size_t n) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!is) throw InputError("unexpected end of container");
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  read_bytes(is, &v, sizeof v);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  read_bytes(is, &v, sizeof v);
  return v;
}

double read_f64(std::istream& is) {
  double v = 0;
  read_bytes(is, &v, sizeof v);
  return v;
}

void write_tensor_record(std::ostream& os, const std::string& name, const NamedTensor& t) {
  write_u32(os, static_cast<std::uint32_t>(name.size()));
  write_bytes(os, name.data(), name.size());
  write_u32(os, static_cast<std::uint32_t>(t.dims.size()));
  for (Index d : t.dims) write_u64(os, static_cast<std::uint64_t>(d));
  if (static_cast<Index>(t.values.size()) != t.element_count())
    throw InputError("tensor '" + name + "' value count does not match its dims");
  for (double v : t.values) write_f64(os, v);
}

std::pair<std::string, NamedTensor> read_tensor_record(std::istream& is) {
  const std::uint32_t name_len = read_u32(is);
  std::string name(name_len, '\0');
  read_bytes(is, name.data(), name_len);
  NamedTensor t;
  const std::uint32_t rank = read_u32(is);
  t.dims.resize(rank);
  for (std::uint32_t i = 0; i < rank; ++i) t.dims[i] = static_cast<Index>(read_u64(is));
  const Index count = t.element_count();
  t.values.resize(static_cast<std::size_t>(count));
  for (double& v : t.values) v = read_f64(is);
  return {std::move(name), std::move(t)};
}

nlohmann::json config_to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["policy"] = to_string(c.encoder.policy);
  j["layers"] = c.encoder.layers;
  j["hidden"] = c.encoder.hidden;
  j["downsample"] = c.encoder.downsample;
  j["chunk_size"] = c.encoder.chunk_size;
  j["backward_init"] = to_string(c.encoder.backward_init);
  j["vocab"] = c.vocab;
  j["feat_dim"] = c.feat_dim;
  j["frame_period_ms"] = c.frame_period_ms;
  j["max_positions"] = c.max_positions;
  j["decoder_hidden"] = c.decoder_hidden;
  j["embed_dim"] = c.embed_dim;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder.policy = encoder_policy_from_string(j.at("policy").get<std::string>());
  c.encoder.layers = j.at("layers").get<int>();
  c.encoder.hidden = j.at("hidden").get<int>();
  c.encoder.downsample = j.at("downsample").get<int>();
  c.encoder.chunk_size = j.at("chunk_size").get<int>();
  c.encoder.backward_init = backward_init_from_string(j.at("backward_init").get<std::string>());
  c.vocab = j.at("vocab").get<int>();
  c.feat_dim = j.at("feat_dim").get<int>();
  c.frame_period_ms = j.at("frame_period_ms").get<double>();
  c.max_positions = j.at("max_positions").get<int>();
  c.decoder_hidden = j.at("decoder_hidden").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  return c;
}

const NamedTensor& require(const TensorMap& map, const std::string& name) {
  auto it = map.find(name);
  if (it == map.end()) throw InputError("weight container is missing tensor '" + name + "'");
  return it->second;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("trailing characters in " + what + " '" + s + "'");
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed " + what + " '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw InputError("trailing characters in " + what + " '" + s + "'");
    return v;
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("malformed " + what + " '" + s + "'");
  }
}

}  // namespace

Index NamedTensor::element_count() const {
  Index n = 1;
  for (Index d : dims) {
    if (d < 0) throw InputError("negative tensor dimension");
    n *= d;
  }
  return dims.empty() ? 0 : n;
}

NamedTensor tensor_from_matrix(const Matrix& m) {
  NamedTensor t;
  t.dims = {m.rows(), m.cols()};
  t.values.assign(m.data(), m.data() + m.size());
  return t;
}

NamedTensor tensor_from_vector(const Vector& v) {
  NamedTensor t;
  t.dims = {v.size()};
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

Matrix matrix_from_tensor(const NamedTensor& t) {
  if (t.dims.size() != 2) throw InputError("expected a rank-2 tensor");
  Matrix m(t.dims[0], t.dims[1]);
  std::copy(t.values.begin(), t.values.end(), m.data());
  return m;
}

Vector vector_from_tensor(const NamedTensor& t) {
  if (t.dims.size() != 1) throw InputError("expected a rank-1 tensor");
  Vector v(t.dims[0]);
  std::copy(t.values.begin(), t.values.end(), v.data());
  return v;
}

TensorMap model_tensors(const ModelParams& model) {
  TensorMap map;
  const auto put_cell = [&](const std::string& prefix, const RecurrentCellParams& cell) {
    map[prefix + ".w_input"] = tensor_from_matrix(cell.w_input);
    map[prefix + ".w_recurrent"] = tensor_from_matrix(cell.w_recurrent);
    map[prefix + ".bias"] = tensor_from_vector(cell.bias);
  };
  for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
    const std::string base = "encoder.layer" + std::to_string(l);
    put_cell(base + ".fwd", model.encoder.layers[l].forward);
    if (model.config.encoder.bidirectional()) put_cell(base + ".bwd", model.encoder.layers[l].backward);
  }
  map["decoder.embedding"] = tensor_from_matrix(model.decoder.embedding);
  for (std::size_t l = 0; l < model.decoder.layers.size(); ++l)
    put_cell("decoder.layer" + std::to_string(l), model.decoder.layers[l]);
  map["decoder.w_query"] = tensor_from_matrix(model.decoder.w_query);
  map["decoder.w_context"] = tensor_from_matrix(model.decoder.w_context);
  map["decoder.w_embed"] = tensor_from_matrix(model.decoder.w_embed);
  map["decoder.w_out"] = tensor_from_matrix(model.decoder.w_out);
  map["decoder.b_out"] = tensor_from_vector(model.decoder.b_out);
  return map;
}

void save_model(const std::string& path, const ModelParams& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  write_bytes(os, kWeightMagic, sizeof kWeightMagic);
  write_u32(os, kWeightFormatVersion);
  const std::string config = config_to_json(model.config).dump();
  write_u32(os, static_cast<std::uint32_t>(config.size()));
  write_bytes(os, config.data(), config.size());
  const TensorMap map = model_tensors(model);
  write_u32(os, static_cast<std::uint32_t>(map.size()));
  for (const auto& [name, tensor] : map) write_tensor_record(os, name, tensor);
  if (!os.flush()) throw InputError("failed to flush '" + path + "'");
}

ModelParams load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  char magic[4] = {};
  read_bytes(is, magic, sizeof magic);
  if (!std::equal(magic, magic + 4, kWeightMagic))
    throw InputError("'" + path + "' is not a weight container");
  const std::uint32_t version = read_u32(is);
  if (version != kWeightFormatVersion)
    throw InputError("unsupported weight container version " + std::to_string(version));
  const std::uint32_t json_len = read_u32(is);
  std::string config_text(json_len, '\0');
  read_bytes(is, config_text.data(), json_len);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const std::exception& e) {
    throw InputError(std::string("malformed config block: ") + e.what());
  }

  ModelParams model;
  model.config = config_from_json(j);
  const std::uint32_t count = read_u32(is);
  TensorMap map;
  for (std::uint32_t i = 0; i < count; ++i) map.insert(read_tensor_record(is));

  const auto get_cell = [&](const std::string& prefix) {
    RecurrentCellParams cell;
    cell.w_input = matrix_from_tensor(require(map, prefix + ".w_input"));
    cell.w_recurrent = matrix_from_tensor(require(map, prefix + ".w_recurrent"));
    cell.bias = vector_from_tensor(require(map, prefix + ".bias"));
    return cell;
  };
  model.encoder.layers.resize(static_cast<std::size_t>(model.config.encoder.layers));
  for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
    const std::string base = "encoder.layer" + std::to_string(l);
    model.encoder.layers[l].forward = get_cell(base + ".fwd");
    if (model.config.encoder.bidirectional())
      model.encoder.layers[l].backward = get_cell(base + ".bwd");
  }
  model.decoder.embedding = matrix_from_tensor(require(map, "decoder.embedding"));
  for (std::size_t l = 0;; ++l) {
    const std::string base = "decoder.layer" + std::to_string(l);
    if (map.find(base + ".w_input") == map.end()) break;
    model.decoder.layers.push_back(get_cell(base));
  }
  model.decoder.w_query = matrix_from_tensor(require(map, "decoder.w_query"));
  model.decoder.w_context = matrix_from_tensor(require(map, "decoder.w_context"));
  model.decoder.w_embed = matrix_from_tensor(require(map, "decoder.w_embed"));
  model.decoder.w_out = matrix_from_tensor(require(map, "decoder.w_out"));
  model.decoder.b_out = vector_from_tensor(require(map, "decoder.b_out"));
  return model;
}

void save_features(const std::string& path, const FeatureSequence& feats) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  write_bytes(os, kFeatureMagic, sizeof kFeatureMagic);
  write_u32(os, kFeatureFormatVersion);
  write_f64(os, feats.frame_period_ms);
  write_tensor_record(os, "features", tensor_from_matrix(feats.frames));
  if (!os.flush()) throw InputError("failed to flush '" + path + "'");
}

FeatureSequence load_features(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  char magic[4] = {};
  read_bytes(is, magic, sizeof magic);
  if (!std::equal(magic, magic + 4, kFeatureMagic))
    throw InputError("'" + path + "' is not a feature container");
  const std::uint32_t version = read_u32(is);
  if (version != kFeatureFormatVersion)
    throw InputError("unsupported feature container version " + std::to_string(version));
  FeatureSequence feats;
  feats.frame_period_ms = read_f64(is);
  auto [name, tensor] = read_tensor_record(is);
  if (name != "features") throw InputError("unexpected tensor '" + name + "' in feature container");
  feats.frames = matrix_from_tensor(tensor);
  return feats;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os << std::setprecision(17);
  for (const ManifestEntry& e : entries) {
    if (e.alignment.size() != e.tokens.size())
      throw InputError("manifest entry '" + e.utt_id + "' alignment/token count mismatch");
    os << e.utt_id << '\t' << e.feature_path << '\t' << e.duration_ms << '\t';
    for (std::size_t i = 0; i < e.tokens.size(); ++i) os << (i ? " " : "") << e.tokens[i];
    os << '\t';
    for (std::size_t i = 0; i < e.alignment.size(); ++i)
      os << (i ? ";" : "") << e.alignment[i].start_ms << ':' << e.alignment[i].end_ms;
    os << '\n';
  }
  if (!os.flush()) throw InputError("failed to flush '" + path + "'");
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open '" + path + "'");
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 5) throw InputError("manifest line with " +
                                             std::to_string(fields.size()) + " fields: " + line);
    ManifestEntry e;
    e.utt_id = fields[0];
    e.feature_path = fields[1];
    e.duration_ms = parse_double(fields[2], "duration");
    if (!fields[3].empty())
      for (const std::string& tok : split(fields[3], ' '))
        e.tokens.push_back(parse_int(tok, "token id"));
    if (!fields[4].empty()) {
      for (const std::string& span : split(fields[4], ';')) {
        const std::vector<std::string> ends = split(span, ':');
        if (ends.size() != 2) throw InputError("malformed alignment span '" + span + "'");
        e.alignment.push_back(
            {parse_double(ends[0], "span start"), parse_double(ends[1], "span end")});
      }
    }
    if (e.alignment.size() != e.tokens.size())
      throw InputError("manifest entry '" + e.utt_id + "' alignment/token count mismatch");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace s2s
