#include "xgan/config.hpp"

#include "xgan/errors.hpp"

namespace xgan {

namespace {

template <typename T>
T get(const Json& j, const char* key, const std::string& section) {
  if (!j.contains(key)) throw ConfigError(section + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

const char* distance_name(Distance d) { return d == Distance::L1 ? "l1" : "l2"; }

Distance parse_distance(const std::string& s, const std::string& field) {
  if (s == "l1") return Distance::L1;
  if (s == "l2") return Distance::L2;
  throw ConfigError(field + ": expected 'l1' or 'l2', got '" + s + "'");
}

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  if (a.is_number_float() && b.is_number()) return true;
  return a.type() == b.type();
}

}  // namespace

Json to_json(const ModelConfig& c) {
  return Json{{"image_size", c.image_size},
              {"channels", c.channels},
              {"embed_dim", c.embed_dim},
              {"encoder_widths", c.encoder_widths},
              {"encoder_fc_width", c.encoder_fc_width},
              {"decoder_widths", c.decoder_widths},
              {"discriminator_widths", c.discriminator_widths},
              {"shared_encoder_blocks", c.shared_encoder_blocks},
              {"shared_decoder_blocks", c.shared_decoder_blocks},
              {"classifier_hidden", c.classifier_hidden},
              {"instance_norm", c.instance_norm},
              {"second_discriminator", c.second_discriminator}};
}

ModelConfig model_config_from_json(const Json& j) {
  const Json full = merge_strict(to_json(ModelConfig{}), j, "model");
  const std::string s = "model";
  ModelConfig c;
  c.image_size = get<int>(full, "image_size", s);
  c.channels = get<int>(full, "channels", s);
  c.embed_dim = get<int>(full, "embed_dim", s);
  c.encoder_widths = get<std::vector<int>>(full, "encoder_widths", s);
  c.encoder_fc_width = get<int>(full, "encoder_fc_width", s);
  c.decoder_widths = get<std::vector<int>>(full, "decoder_widths", s);
  c.discriminator_widths = get<std::vector<int>>(full, "discriminator_widths", s);
  c.shared_encoder_blocks = get<int>(full, "shared_encoder_blocks", s);
  c.shared_decoder_blocks = get<int>(full, "shared_decoder_blocks", s);
  c.classifier_hidden = get<int>(full, "classifier_hidden", s);
  c.instance_norm = get<bool>(full, "instance_norm", s);
  c.second_discriminator = get<bool>(full, "second_discriminator", s);
  c.validate();
  return c;
}

Json to_json(const LossWeights& w) {
  return Json{{"w_dann", w.w_dann},
              {"w_sem", w.w_sem},
              {"w_gan", w.w_gan},
              {"w_teach", w.w_teach},
              {"gan_2to1_enabled", w.gan_2to1_enabled},
              {"teach_enabled", w.teach_enabled},
              {"tv_weight", w.tv_weight}};
}

LossWeights loss_weights_from_json(const Json& j) {
  const Json full = merge_strict(to_json(LossWeights{}), j, "train.weights");
  const std::string s = "train.weights";
  LossWeights w;
  w.w_dann = get<double>(full, "w_dann", s);
  w.w_sem = get<double>(full, "w_sem", s);
  w.w_gan = get<double>(full, "w_gan", s);
  w.w_teach = get<double>(full, "w_teach", s);
  w.gan_2to1_enabled = get<bool>(full, "gan_2to1_enabled", s);
  w.teach_enabled = get<bool>(full, "teach_enabled", s);
  w.tv_weight = get<double>(full, "tv_weight", s);
  return w;
}

Json to_json(const LossConfig& c) {
  Json domains = Json::array();
  for (DomainId d : c.teacher_domains) domains.push_back(to_string(d));
  return Json{{"sem_distance", distance_name(c.sem_distance)},
              {"teach_distance", distance_name(c.teach_distance)},
              {"dann_loss_fn", "bce"},
              {"gan_generator_form", c.gan_generator_form == GanForm::Minimax ? "minimax" : "non_saturating"},
              {"teacher_domains", domains}};
}

LossConfig loss_config_from_json(const Json& j) {
  const Json full = merge_strict(to_json(LossConfig{}), j, "train.loss");
  const std::string s = "train.loss";
  LossConfig c;
  c.sem_distance = parse_distance(get<std::string>(full, "sem_distance", s), s + ".sem_distance");
  c.teach_distance = parse_distance(get<std::string>(full, "teach_distance", s), s + ".teach_distance");
  if (get<std::string>(full, "dann_loss_fn", s) != "bce") throw ConfigError(s + ".dann_loss_fn: only 'bce' is supported");
  const auto form = get<std::string>(full, "gan_generator_form", s);
  if (form == "minimax") c.gan_generator_form = GanForm::Minimax;
  else if (form == "non_saturating") c.gan_generator_form = GanForm::NonSaturating;
  else throw ConfigError(s + ".gan_generator_form: expected 'minimax' or 'non_saturating', got '" + form + "'");
  c.teacher_domains.clear();
  for (const auto& d : get<std::vector<std::string>>(full, "teacher_domains", s)) {
    if (d == "d1") c.teacher_domains.push_back(DomainId::D1);
    else if (d == "d2") c.teacher_domains.push_back(DomainId::D2);
    else throw ConfigError(s + ".teacher_domains: unknown domain '" + d + "'");
  }
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_epsilon", c.adam_epsilon},
              {"batch_size", c.batch_size},
              {"total_steps", c.total_steps},
              {"seed", c.seed},
              {"checkpoint_every", c.checkpoint_every},
              {"metrics_every", c.metrics_every},
              {"weights", to_json(c.weights)},
              {"loss", to_json(c.loss)},
              {"mode", to_string(c.mode)}};
}

TrainConfig train_config_from_json(const Json& j) {
  const Json full = merge_strict(to_json(TrainConfig{}), j, "train");
  const std::string s = "train";
  TrainConfig c;
  c.learning_rate = get<double>(full, "learning_rate", s);
  c.adam_beta1 = get<double>(full, "adam_beta1", s);
  c.adam_beta2 = get<double>(full, "adam_beta2", s);
  c.adam_epsilon = get<double>(full, "adam_epsilon", s);
  c.batch_size = get<int>(full, "batch_size", s);
  c.total_steps = get<std::int64_t>(full, "total_steps", s);
  c.seed = get<std::uint64_t>(full, "seed", s);
  c.checkpoint_every = get<std::int64_t>(full, "checkpoint_every", s);
  c.metrics_every = get<std::int64_t>(full, "metrics_every", s);
  c.weights = loss_weights_from_json(full.at("weights"));
  c.loss = loss_config_from_json(full.at("loss"));
  c.mode = parse_train_mode(get<std::string>(full, "mode", s));
  c.validate();
  return c;
}

Json to_json(const LossReport& r) {
  return Json{{"rec_1", r.rec_1},       {"rec_2", r.rec_2},       {"dann", r.dann},
              {"sem_1to2", r.sem_1to2}, {"sem_2to1", r.sem_2to1}, {"gan_gen", r.gan_gen},
              {"gan_disc", r.gan_disc}, {"teach", r.teach},       {"tv", r.tv},
              {"total", r.total}};
}

Json merge_strict(const Json& base, const Json& patch, const std::string& path) {
  const std::string where = path.empty() ? "<root>" : path;
  if (!patch.is_object()) throw ConfigError(where + ": expected an object");
  if (!base.is_object()) throw ConfigError(where + ": is not a section");
  Json out = base;
  const bool free_form = base.empty();
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) {
      if (free_form) {
        out[it.key()] = it.value();
        continue;
      }
      throw ConfigError("unknown config key '" + key + "'");
    }
    const Json& b = base.at(it.key());
    if (b.is_object()) {
      out[it.key()] = merge_strict(b, it.value(), key);
    } else if (b.is_null() || same_kind(b, it.value()) || (b.is_array() && it.value().is_array())) {
      out[it.key()] = it.value();
    } else {
      throw ConfigError("config key '" + key + "': expected " + std::string(b.type_name()) + ", got " +
                        std::string(it.value().type_name()));
    }
  }
  return out;
}

void apply_dotted_override(Json& config, const std::string& key, const std::string& value) {
  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;
  }
  Json patch = parsed;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
  config = merge_strict(config, patch);
}

}  // namespace xgan
