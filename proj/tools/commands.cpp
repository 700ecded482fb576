#include "commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "xgan/checkpoint.hpp"
#include "xgan/errors.hpp"
#include "xgan/evalkit.hpp"
#include "xgan/run_config.hpp"
#include "xgan/teacher.hpp"

namespace xgan::cli {

namespace fs = std::filesystem;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct Common {
  std::string config_path;
  Overrides shortcuts;  // explicit flags mapped onto dotted keys
};

Overrides parse_overrides(const std::vector<std::string>& extra) {
  Overrides out;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const std::string& a = extra[i];
    if (a.rfind("--", 0) != 0 || a.find('.') == std::string::npos)
      throw ConfigError("unrecognized argument '" + a + "' (overrides look like --section.key value)");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      if (i + 1 >= extra.size()) throw ConfigError("override '" + a + "' is missing a value");
      out.emplace_back(a.substr(2), extra[++i]);
    }
  }
  return out;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is required");
  if (!fs::exists(path)) throw ConfigError(what + " '" + path + "' not found");
}

struct Loaded {
  Json json;
  RunConfig config;
};

Loaded load_config(const Common& c, const std::vector<std::string>& extra) {
  Overrides ov = c.shortcuts;
  for (auto& o : parse_overrides(extra)) ov.push_back(std::move(o));
  if (!c.config_path.empty()) require_file(c.config_path, "config file");
  Json j = load_run_config_json(c.config_path, ov);
  return {j, run_config_from_json(j)};
}

void echo_config(const Loaded& l) {
  fs::create_directories(l.config.output_dir);
  std::ofstream(fs::path(l.config.output_dir) / "config.json") << l.json.dump(2) << '\n';
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

DomainId parse_direction(const std::string& s) {
  if (s == "1to2") return DomainId::D1;
  if (s == "2to1") return DomainId::D2;
  throw ConfigError("direction must be '1to2' or '2to1', got '" + s + "'");
}

std::vector<TrainMode> parse_modes(const std::string& list) {
  std::vector<TrainMode> out;
  std::stringstream ss(list);
  for (std::string m; std::getline(ss, m, ',');)
    if (!m.empty()) out.push_back(parse_train_mode(m));
  if (out.empty()) throw ConfigError("no modes given");
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(list);
  for (std::string s; std::getline(ss, s, ',');) {
    if (s.empty()) continue;
    try {
      out.push_back(std::stoull(s));
    } catch (const std::exception&) {
      throw ConfigError("seed '" + s + "' is not a nonnegative integer");
    }
  }
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

std::optional<TeacherNet<float>> maybe_teacher(const RunConfig& c) {
  if (c.teacher_path.empty()) return std::nullopt;
  require_file(c.teacher_path, "teacher checkpoint");
  auto t = load_teacher(c.teacher_path);
  check_teacher_compatible(c.model, t);
  return t;
}

// ---------------------------------------------------------------- commands

int gen_data(const Loaded& l) {
  const auto schema = schema_for(l.config);
  echo_config(l);
  for (int i = 0; i < 2; ++i) {
    const DomainId d = i == 0 ? DomainId::D1 : DomainId::D2;
    const auto& src = l.config.data[static_cast<std::size_t>(i)];
    if (src.kind != DataSourceKind::Synthetic) {
      std::cout << to_string(d) << ": directory source, nothing to generate\n";
      continue;
    }
    CorpusSpec spec = src.synthetic;
    spec.image_size = l.config.model.image_size;
    const Corpus corpus = build_corpus(schema, spec);
    const fs::path dir = fs::path(l.config.output_dir) / "data" / to_string(d);
    export_corpus(corpus, schema, dir.string());
    const Split split = split_train_test(corpus.labels.size());
    std::cout << to_string(d) << ": " << corpus.labels.size() << " samples (" << split.train.size() << " train, "
              << split.test.size() << " test) -> " << dir.string() << '\n';
  }
  return 0;
}

int train_teacher_cmd(const Loaded& l, std::string out) {
  const auto schema = schema_for(l.config);
  echo_config(l);
  const DomainData d1 = load_domain(l.config, schema, DomainId::D1);
  if (!d1.labeled) throw ConfigError("teacher training needs labeled D1 data");
  TeacherConfig tc = TeacherConfig::matching(l.config.model);
  tc.fit.steps = l.config.teacher_steps;
  tc.seed = l.config.train.seed;
  const auto teacher = train_teacher(d1.train.images, d1.train.labels, schema.option_counts(), tc);
  if (out.empty()) out = (fs::path(l.config.output_dir) / "teacher.ckpt").string();
  save_teacher(teacher, out);
  std::cout << "teacher held-out accuracy: " << join(teacher.heldout_accuracy()) << "\nsaved " << out << '\n';
  return 0;
}

int train_probe_cmd(const Loaded& l, std::string out_dir) {
  const auto schema = schema_for(l.config);
  echo_config(l);
  if (out_dir.empty()) out_dir = l.config.output_dir;
  fs::create_directories(out_dir);
  bool aligned = true;
  for (DomainId d : {DomainId::D1, DomainId::D2}) {
    const Corpus corpus = probe_corpus(l.config, schema, d);
    const auto probe = train_probe(corpus, schema, probe_spec(l.config),
                                   to_string(l.config.data[d == DomainId::D1 ? 0 : 1].synthetic.style),
                                   l.config.probe_seed);
    const auto path = (fs::path(out_dir) / ("probe_" + std::string(to_string(d)) + ".ckpt")).string();
    save_probe(probe, path);
    const bool ok = probe.min_heldout_accuracy() >= kProbeAlignmentGate;
    aligned = aligned && ok;
    std::cout << "probe " << to_string(d) << " held-out accuracy: " << join(probe.heldout_accuracy())
              << (ok ? "  [alignment gate ok]" : "  [below alignment gate]") << "\nsaved " << path << '\n';
  }
  return aligned ? 0 : 1;
}

int train_cmd(const Loaded& l, const std::string& resume) {
  const auto schema = schema_for(l.config);
  echo_config(l);
  const auto& cfg = l.config;
  const DomainData d1 = load_domain(cfg, schema, DomainId::D1);
  const DomainData d2 = load_domain(cfg, schema, DomainId::D2);
  const auto teacher = maybe_teacher(cfg);
  const TeacherNet<float>* tp = teacher ? &*teacher : nullptr;

  TrainState state;
  if (!resume.empty()) {
    require_file(resume, "checkpoint");
    state = std::move(load_checkpoint(resume, cfg.model).state);
    std::cout << "resuming at step " << state.step << '\n';
  } else {
    state = TrainState::initialize(cfg.model, cfg.train, tp);
  }
  const fs::path out(cfg.output_dir);
  fs::create_directories(out / "checkpoints");
  std::ofstream metrics(out / "metrics.jsonl", resume.empty() ? std::ios::trunc : std::ios::app);
  TrainSinks sinks;
  sinks.metrics = [&](const MetricRecord& r) {
    metrics << Json{{"step", r.step}, {"losses", to_json(r.report)}, {"disc_loss", r.disc_loss},
                    {"wall_time", r.wall_time}}
                   .dump()
            << '\n';
    metrics.flush();
  };
  sinks.checkpoint = [&](const TrainState& s) {
    char name[48];
    std::snprintf(name, sizeof name, "step_%08lld.ckpt", static_cast<long long>(s.step));
    save_checkpoint(s, cfg.train, (out / "checkpoints" / name).string());
  };
  continue_training(state, cfg.train, d1.train.images, d2.train.images, tp, sinks);
  const auto final_path = (out / "final.ckpt").string();
  save_checkpoint(state, cfg.train, final_path);
  std::cout << "trained " << to_string(cfg.train.mode) << " to step " << state.step << "; saved " << final_path
            << '\n';
  return 0;
}

int translate_cmd(const std::string& checkpoint, const std::string& input_dir, const std::string& direction,
                  const std::string& out_dir, int pairs_per_row) {
  const DomainId from = parse_direction(direction);
  require_file(checkpoint, "checkpoint");
  if (!fs::is_directory(input_dir)) throw ConfigError("input directory '" + input_dir + "' not found");
  const auto loaded = load_checkpoint(checkpoint);
  const auto& model = loaded.state.model;
  const LoadedImages inputs = load_image_dir(input_dir, model.config().image_size);
  for (const auto& e : inputs.errors) std::cerr << "skipped " << e << '\n';
  fs::create_directories(out_dir);
  const auto outputs = translate(model, inputs.images, from);
  for (int i = 0; i < outputs.n; ++i)
    write_png((fs::path(out_dir) / inputs.files[static_cast<std::size_t>(i)]).string(), to_rgb8(outputs, i),
              outputs.w, outputs.h);
  GridLayout layout;
  layout.pairs_per_row = pairs_per_row;
  const auto grid = (fs::path(out_dir) / "grid.png").string();
  write_sample_grid(inputs.images, outputs, grid, layout);
  std::cout << "translated " << outputs.n << " images (" << direction << "); grid " << grid << '\n';
  return inputs.errors.empty() ? 0 : 1;
}

int eval_cmd(const Loaded& l, const std::string& checkpoint, const std::string& probe_d2_path,
             const std::string& probe_d1_path, std::string report_path) {
  require_file(checkpoint, "checkpoint");
  if (!probe_d2_path.empty()) require_file(probe_d2_path, "probe file");
  if (!probe_d1_path.empty()) require_file(probe_d1_path, "probe file");
  const auto schema = schema_for(l.config);
  const auto loaded = load_checkpoint(checkpoint, l.config.model);
  std::optional<ProbeClassifier> p2, p1;
  if (!probe_d2_path.empty()) {
    p2 = load_probe(probe_d2_path);
    p2->check_schema(schema);
  }
  if (!probe_d1_path.empty()) {
    p1 = load_probe(probe_d1_path);
    p1->check_schema(schema);
  }
  const DomainData d1 = load_domain(l.config, schema, DomainId::D1);
  const DomainData d2 = load_domain(l.config, schema, DomainId::D2);
  if (p2 && !d1.labeled) throw ConfigError("preservation 1to2 needs labeled D1 test data");
  if (p1 && !d2.labeled) throw ConfigError("preservation 2to1 needs labeled D2 test data");
  EvalData data{d1.test.images, d2.test.images, d1.test.labels, d2.test.labels};
  EvalReport r = evaluate(loaded.state.model, data, p2 ? &*p2 : nullptr, p1 ? &*p1 : nullptr,
                          loaded.train.loss.sem_distance);
  r.mode = to_string(loaded.train.mode);
  r.seed = loaded.train.seed;
  r.step = loaded.state.step;
  r.config_fingerprint = config_fingerprint(loaded.model, loaded.train);
  if (report_path.empty()) {
    fs::create_directories(l.config.output_dir);
    report_path = (fs::path(l.config.output_dir) / "eval.jsonl").string();
  }
  append_report(r, report_path);
  std::cout << to_json(r).dump(2) << "\nappended to " << report_path << '\n';
  return 0;
}

int ablate_cmd(const Loaded& l, const std::string& modes, const std::string& seeds, const std::string& probe_d2_path,
               const std::string& probe_d1_path) {
  AblationOptions opts;
  opts.modes = parse_modes(modes);
  opts.seeds = parse_seeds(seeds);
  if (!probe_d2_path.empty()) require_file(probe_d2_path, "probe file");
  if (!probe_d1_path.empty()) require_file(probe_d1_path, "probe file");
  const auto schema = schema_for(l.config);
  echo_config(l);
  const auto& cfg = l.config;
  const DomainData d1 = load_domain(cfg, schema, DomainId::D1);
  const DomainData d2 = load_domain(cfg, schema, DomainId::D2);
  const auto teacher = maybe_teacher(cfg);

  std::optional<ProbeClassifier> p2, p1;
  auto get_probe = [&](const std::string& path, DomainId d) {
    if (!path.empty()) return load_probe(path);
    std::cout << "fitting " << to_string(d) << " probe..." << std::endl;
    return train_probe(probe_corpus(cfg, schema, d), schema, probe_spec(cfg),
                       to_string(cfg.data[d == DomainId::D1 ? 0 : 1].synthetic.style), cfg.probe_seed);
  };
  if (d1.labeled) p2 = get_probe(probe_d2_path, DomainId::D2);
  if (d2.labeled) p1 = get_probe(probe_d1_path, DomainId::D1);
  for (const auto* p : {p1 ? &*p1 : nullptr, p2 ? &*p2 : nullptr})
    if (p) p->check_schema(schema);

  AblationInputs in;
  in.model = cfg.model;
  in.train = cfg.train;
  in.train1 = d1.train.images;
  in.train2 = d2.train.images;
  in.eval = EvalData{d1.test.images, d2.test.images, d1.test.labels, d2.test.labels};
  in.probe_d2 = p2 ? &*p2 : nullptr;
  in.probe_d1 = p1 ? &*p1 : nullptr;
  in.teacher = teacher ? &*teacher : nullptr;

  const auto jsonl = (fs::path(cfg.output_dir) / "ablation.jsonl").string();
  opts.on_run = [&](const EvalReport& r) {
    append_report(r, jsonl);
    std::cout << r.mode << " seed " << r.seed << (r.error.empty() ? " done" : " failed: " + r.error) << std::endl;
  };
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = ablation_suite(in, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string table = format_ablation_table(rows);
  std::ofstream(fs::path(cfg.output_dir) / "ablation.txt") << table;
  std::cout << table << "wall time " << secs << " s\n";
  bool any_failed = false;
  for (const auto& r : rows) any_failed = any_failed || !r.error.empty();
  return any_failed ? 1 : 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"XGAN semantic style transfer"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  Common common;
  std::string out, resume, checkpoint, input_dir, direction = "1to2", probe_d1, probe_d2, report;
  std::string modes = "full_xgan,no_sem,rec_dann_only,no_gan,high_dann", seeds = "0,1,2";
  std::string mode_flag, teacher_flag, output_flag;
  std::int64_t steps = -1;
  int pairs_per_row = 4;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config_path, "JSON run configuration");
    sub->add_option("-o,--output-dir", output_flag, "Overrides output_dir");
    sub->allow_extras();
    return sub;
  };
  auto* gen = with_config(app.add_subcommand("gen-data", "Render both synthetic corpora with split manifests"));
  auto* teach = with_config(app.add_subcommand("train-teacher", "Fit the frozen D1 attribute teacher"));
  teach->add_option("--out", out, "Teacher checkpoint path");
  auto* probe = with_config(app.add_subcommand("train-probe", "Fit per-style attribute probes"));
  probe->add_option("--out-dir", out, "Directory for probe_d1.ckpt / probe_d2.ckpt");
  auto* trn = with_config(app.add_subcommand("train", "Train XGAN"));
  trn->add_option("--mode", mode_flag, "Training mode");
  trn->add_option("--steps", steps, "Total generator steps");
  trn->add_option("--teacher", teacher_flag, "Teacher checkpoint");
  trn->add_option("--resume", resume, "Continue from a checkpoint");
  auto* tr = app.add_subcommand("translate", "Translate a directory of images");
  tr->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  tr->add_option("--input-dir", input_dir, "Directory of PNG inputs")->required();
  tr->add_option("--direction", direction, "1to2 or 2to1");
  tr->add_option("--out", out, "Output directory")->required();
  tr->add_option("--pairs-per-row", pairs_per_row, "Grid pairs per row");
  auto* ev = with_config(app.add_subcommand("eval", "Evaluate a checkpoint on the held-out splits"));
  ev->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  ev->add_option("--probe-d2", probe_d2, "D2-style probe (scores 1to2 preservation)");
  ev->add_option("--probe-d1", probe_d1, "D1-style probe (scores 2to1 preservation)");
  ev->add_option("--report", report, "JSONL file to append to");
  auto* ab = with_config(app.add_subcommand("ablate", "Train and evaluate several modes over seeds"));
  ab->add_option("--modes", modes, "Comma-separated modes");
  ab->add_option("--seeds", seeds, "Comma-separated seeds");
  ab->add_option("--teacher", teacher_flag, "Teacher checkpoint");
  ab->add_option("--probe-d2", probe_d2, "Pretrained D2 probe");
  ab->add_option("--probe-d1", probe_d1, "Pretrained D1 probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!output_flag.empty()) common.shortcuts.emplace_back("output_dir", Json(output_flag).dump());
    if (!mode_flag.empty()) common.shortcuts.emplace_back("train.mode", Json(mode_flag).dump());
    if (steps >= 0) common.shortcuts.emplace_back("train.total_steps", std::to_string(steps));
    if (!teacher_flag.empty()) common.shortcuts.emplace_back("teacher.path", Json(teacher_flag).dump());
    if (*gen) return gen_data(load_config(common, gen->remaining()));
    if (*teach) return train_teacher_cmd(load_config(common, teach->remaining()), out);
    if (*probe) return train_probe_cmd(load_config(common, probe->remaining()), out);
    if (*trn) return train_cmd(load_config(common, trn->remaining()), resume);
    if (*tr) return translate_cmd(checkpoint, input_dir, direction, out, pairs_per_row);
    if (*ev) return eval_cmd(load_config(common, ev->remaining()), checkpoint, probe_d2, probe_d1, report);
    if (*ab) return ablate_cmd(load_config(common, ab->remaining()), modes, seeds, probe_d2, probe_d1);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace xgan::cli
