#include "xgan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "xgan/errors.hpp"

namespace xgan {

namespace {

constexpr char kMagic[8] = {'X', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw CheckpointError("cannot open '" + path + "' for writing");
  }
  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensor(const std::string& name, const Tensor<float>& t) {
    bytes(name);
    for (int d : {t.n, t.c, t.h, t.w}) pod<std::int32_t>(d);
    out_.write(reinterpret_cast<const char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  void finish() {
    out_.flush();
    if (!out_) throw CheckpointError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw CheckpointError("cannot open checkpoint '" + path + "'");
  }
  template <typename T>
  T pod(const char* field) {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw CheckpointError(path_ + ": truncated while reading " + field);
    return v;
  }
  std::string bytes(const char* field) {
    const auto n = pod<std::uint64_t>(field);
    if (n > (1ull << 32)) throw CheckpointError(path_ + ": corrupt length for " + field);
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) throw CheckpointError(path_ + ": truncated while reading " + field);
    return s;
  }
  void tensor_into(const std::string& expected_name, Tensor<float>& t) {
    const std::string name = bytes("tensor name");
    if (name != expected_name)
      throw CheckpointError(path_ + ": expected tensor '" + expected_name + "', found '" + name + "'");
    std::int32_t dims[4];
    for (auto& d : dims) d = pod<std::int32_t>("tensor shape");
    if (dims[0] != t.n || dims[1] != t.c || dims[2] != t.h || dims[3] != t.w)
      throw CheckpointError(path_ + ": tensor '" + name + "' has shape " + std::to_string(dims[0]) + "x" +
                            std::to_string(dims[1]) + "x" + std::to_string(dims[2]) + "x" + std::to_string(dims[3]) +
                            ", expected " + t.shape_string());
    in_.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!in_) throw CheckpointError(path_ + ": truncated in tensor '" + name + "'");
  }
  void expect_end() {
    in_.peek();
    if (!in_.eof()) throw CheckpointError(path_ + ": trailing bytes after last tensor");
  }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
};

void write_header(Writer& w, CheckpointKind kind, const Json& config) {
  w.pod(kMagic);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(kind));
  w.bytes(config.dump());
}

Json read_header(Reader& r, CheckpointKind kind) {
  char magic[8];
  for (auto& c : magic) c = r.pod<char>("magic");
  if (std::memcmp(magic, kMagic, 8) != 0) throw CheckpointError(r.path() + ": not an xgan checkpoint (bad magic)");
  const auto version = r.pod<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CheckpointError(r.path() + ": version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto k = r.pod<std::uint32_t>("kind");
  if (k != static_cast<std::uint32_t>(kind))
    throw CheckpointError(r.path() + ": checkpoint kind " + std::to_string(k) + " does not match expected kind " +
                          std::to_string(static_cast<std::uint32_t>(kind)));
  try {
    return Json::parse(r.bytes("config"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(r.path() + ": corrupt embedded config: " + e.what());
  }
}

std::string first_difference(const Json& a, const Json& b, const std::string& path) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) return path + "." + it.key();
      auto d = first_difference(it.value(), b.at(it.key()), path + "." + it.key());
      if (!d.empty()) return d;
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) return path + "." + it.key();
    return "";
  }
  return a == b ? "" : path;
}

Json stack_to_json(const ConvStackSpec& s) {
  return Json{{"image_size", s.image_size},
              {"channels", s.channels},
              {"conv_widths", s.conv_widths},
              {"fc_widths", s.fc_widths},
              {"instance_norm", s.instance_norm}};
}

ConvStackSpec stack_from_json(const Json& j) {
  return ConvStackSpec{j.at("image_size").get<int>(), j.at("channels").get<int>(),
                       j.at("conv_widths").get<std::vector<int>>(), j.at("fc_widths").get<std::vector<int>>(),
                       j.at("instance_norm").get<bool>()};
}

}  // namespace

void save_checkpoint(const TrainState& state, const TrainConfig& config, const std::string& path) {
  Writer w(path);
  write_header(w, CheckpointKind::Model, Json{{"model", to_json(state.model.config())}, {"train", to_json(config)}});
  w.pod<std::int64_t>(state.step);
  std::ostringstream rng;
  rng << state.rng;
  w.bytes(rng.str());
  for (int d = 0; d < 2; ++d) {
    const auto& order = state.sampler.order[d];
    w.pod<std::uint64_t>(order.size());
    for (auto v : order) w.pod<std::uint32_t>(v);
    w.pod<std::uint64_t>(state.sampler.cursor[d]);
  }
  const auto& P = state.model.params();
  w.pod<std::uint64_t>(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) w.tensor(P[i].name, P[i].value);
  for (std::size_t i = 0; i < P.size(); ++i) w.tensor("adam_m." + P[i].name, state.adam_m[i]);
  for (std::size_t i = 0; i < P.size(); ++i) w.tensor("adam_v." + P[i].name, state.adam_v[i]);
  w.finish();
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  const Json header = read_header(r, CheckpointKind::Model);
  LoadedCheckpoint out;
  try {
    out.model = model_config_from_json(header.at("model"));
    out.train = train_config_from_json(header.at("train"));
  } catch (const ConfigError& e) {
    throw CheckpointError(path + ": embedded config invalid: " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": embedded config incomplete: " + e.what());
  }
  TrainState& s = out.state;
  s.model = XganModel<float>::build(out.model, 0);
  s.step = r.pod<std::int64_t>("step");
  std::istringstream rng(r.bytes("rng_state"));
  rng >> s.rng;
  if (!rng) throw CheckpointError(path + ": corrupt rng_state");
  for (int d = 0; d < 2; ++d) {
    const auto n = r.pod<std::uint64_t>("sampler order size");
    if (n > (1ull << 31)) throw CheckpointError(path + ": corrupt sampler order size");
    s.sampler.order[d].resize(n);
    for (auto& v : s.sampler.order[d]) v = r.pod<std::uint32_t>("sampler order");
    s.sampler.cursor[d] = r.pod<std::uint64_t>("sampler cursor");
  }
  auto& P = s.model.params();
  const auto count = r.pod<std::uint64_t>("tensor count");
  if (count != P.size())
    throw CheckpointError(path + ": holds " + std::to_string(count) + " parameter tensors, model has " +
                          std::to_string(P.size()));
  for (std::size_t i = 0; i < P.size(); ++i) r.tensor_into(P[i].name, P[i].value);
  s.adam_m = GradSet<float>(P);
  s.adam_v = GradSet<float>(P);
  for (std::size_t i = 0; i < P.size(); ++i) r.tensor_into("adam_m." + P[i].name, s.adam_m[i]);
  for (std::size_t i = 0; i < P.size(); ++i) r.tensor_into("adam_v." + P[i].name, s.adam_v[i]);
  r.expect_end();
  return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected) {
  LoadedCheckpoint c = load_checkpoint(path);
  if (!(c.model == expected)) {
    const std::string field = first_difference(to_json(c.model), to_json(expected), "model");
    throw CheckpointError(path + ": checkpoint model config disagrees with the active config at " + field);
  }
  return c;
}

void save_attribute_net(const AttributeNet<float>& net, CheckpointKind kind, const Json& meta,
                        const std::string& path) {
  Writer w(path);
  write_header(w, kind,
               Json{{"trunk", stack_to_json(net.spec.trunk)}, {"option_counts", net.spec.option_counts}, {"meta", meta}});
  w.pod<std::uint64_t>(net.params.size());
  for (const auto& p : net.params) w.tensor(p.name, p.value);
  w.finish();
}

AttributeNet<float> load_attribute_net(const std::string& path, CheckpointKind kind, Json* meta) {
  Reader r(path);
  const Json header = read_header(r, kind);
  AttributeNetSpec spec;
  try {
    spec.trunk = stack_from_json(header.at("trunk"));
    spec.option_counts = header.at("option_counts").get<std::vector<int>>();
    if (meta) *meta = header.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": embedded spec incomplete: " + e.what());
  }
  AttributeNet<float> net = build_attribute_net<float>(spec, 0);
  const auto count = r.pod<std::uint64_t>("tensor count");
  if (count != net.params.size()) throw CheckpointError(path + ": wrong number of tensors");
  for (auto& p : net.params) r.tensor_into(p.name, p.value);
  r.expect_end();
  return net;
}

void save_teacher(const TeacherNet<float>& teacher, const std::string& path) {
  save_attribute_net(teacher.net(), CheckpointKind::Teacher, Json{{"heldout_accuracy", teacher.heldout_accuracy()}},
                     path);
}

TeacherNet<float> load_teacher(const std::string& path) {
  Json meta;
  AttributeNet<float> net = load_attribute_net(path, CheckpointKind::Teacher, &meta);
  TeacherNet<float> t(std::move(net), meta.value("heldout_accuracy", std::vector<double>{}));
  t.freeze();
  return t;
}

}  // namespace xgan
