// Synthetic benchmark, ablation directionality and the high domain-weight
// failure mode. Trains five modes x three seeds on the 32px benchmark config,
// then prints one PASS/FAIL line per criterion.
//
// usage: acceptance_benchmark [config.json] [report_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "xgan/evalkit.hpp"
#include "xgan/run_config.hpp"

using namespace xgan;
namespace fs = std::filesystem;

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Mean of the training reconstruction loss over the last few metric records.
constexpr std::size_t kTailRecords = 10;

struct RecTrace {
  std::array<double, 2> at10{NAN, NAN};
  std::vector<std::array<double, 2>> tail;
  std::array<double, 2> drop() const {
    std::array<double, 2> out{};
    for (int d = 0; d < 2; ++d) {
      double s = 0;
      for (const auto& t : tail) s += t[d];
      out[d] = 1.0 - (s / tail.size()) / at10[d];
    }
    return out;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string config_path = argc > 1 ? argv[1] : XGAN_BENCH_CONFIG;
  const fs::path out_dir = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "xgan_benchmark";
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  const RunConfig rc = run_config_from_json(load_run_config_json(config_path, {}));
  const auto schema = schema_for(rc);
  const auto d1 = load_domain(rc, schema, DomainId::D1), d2 = load_domain(rc, schema, DomainId::D2);
  const auto spec = probe_spec(rc);
  const auto probe1 = train_probe(probe_corpus(rc, schema, DomainId::D1), schema, spec, "style_a", rc.probe_seed);
  const auto probe2 = train_probe(probe_corpus(rc, schema, DomainId::D2), schema, spec, "style_b", rc.probe_seed + 1);
  std::cout << "probes: min held-out " << probe1.min_heldout_accuracy() << " / " << probe2.min_heldout_accuracy()
            << std::endl;

  AblationInputs in{rc.model,
                    rc.train,
                    d1.train.images,
                    d2.train.images,
                    {d1.test.images, d2.test.images, d1.test.labels, d2.test.labels},
                    &probe2,
                    &probe1,
                    nullptr};
  AblationOptions opts;
  opts.modes = {TrainMode::FullXgan, TrainMode::NoSem, TrainMode::RecDannOnly, TrainMode::NoGan, TrainMode::HighDann};
  opts.seeds = {0, 1, 2};
  const std::int64_t steps = rc.train.total_steps;
  const std::int64_t tail_from = steps - static_cast<std::int64_t>(kTailRecords) * rc.train.metrics_every;
  std::map<std::pair<TrainMode, std::uint64_t>, RecTrace> traces;
  std::ofstream metrics(out_dir / "metrics.jsonl");
  opts.on_metrics = [&](TrainMode mode, std::uint64_t seed, const MetricRecord& m) {
    auto& t = traces[{mode, seed}];
    if (m.step == 10) t.at10 = {m.report.rec_1, m.report.rec_2};
    if (m.step > tail_from) t.tail.push_back({m.report.rec_1, m.report.rec_2});
    metrics << Json{{"mode", to_string(mode)}, {"seed", seed}, {"step", m.step}, {"losses", to_json(m.report)},
                    {"disc", m.disc_loss}}
                   .dump()
            << "\n";
  };
  const fs::path runs_path = out_dir / "runs.jsonl";
  fs::remove(runs_path);
  opts.on_run = [&](const EvalReport& r) {
    append_report(r, runs_path.string());
    std::cout << "finished " << r.mode << " seed " << r.seed << (r.error.empty() ? "" : " error: " + r.error)
              << " (" << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << "s)"
              << std::endl;
  };
  const auto rows = ablation_suite(in, opts);
  const auto table = format_ablation_table(rows);
  std::ofstream(out_dir / "ablation.txt") << table;
  std::cout << table;

  std::map<TrainMode, const AblationRow*> by_mode;
  for (const auto& r : rows) by_mode[r.mode] = &r;
  const auto ok = [&](TrainMode m) { return by_mode.count(m) && by_mode[m]->error.empty(); };
  const EvalReport& full = by_mode[TrainMode::FullXgan]->median;
  int failed = 0;
  const auto verdict = [&](bool pass, const std::string& name, const std::string& detail) {
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << name << ": " << detail << std::endl;
  };

  {
    std::vector<double> drop1, drop2;
    for (std::uint64_t s : opts.seeds) {
      const auto it = traces.find({TrainMode::FullXgan, s});
      if (it == traces.end() || it->second.tail.empty()) continue;
      const auto d = it->second.drop();
      drop1.push_back(d[0]);
      drop2.push_back(d[1]);
    }
    const double m1 = median(drop1), m2 = median(drop2);
    const bool a = ok(TrainMode::FullXgan) && m1 >= 0.8 && m2 >= 0.8;
    const bool b = ok(TrainMode::FullXgan) && full.domain_confusion >= 0.40 && full.domain_confusion <= 0.60;
    bool binary = true;
    std::string binaries;
    const auto counts = schema.option_counts();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] != 2 || i >= full.preservation_1to2.size()) continue;
      binary &= full.preservation_1to2[i] >= 0.70;
      binaries += " " + schema.attributes[i].name + "=" + fmt(full.preservation_1to2[i]);
    }
    const double gap = full.macro_1to2 - full.chance_macro_1to2;
    const bool c = ok(TrainMode::FullXgan) && full.has_1to2 && gap >= 0.20 && binary;
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
    verdict(a, "5a reconstruction drop", "median drop d1 " + fmt(m1) + ", d2 " + fmt(m2) + " (need >= 0.8)");
    verdict(b, "5b domain confusion", fmt(full.domain_confusion) + " (need [0.40, 0.60])");
    verdict(c, "5c attribute preservation",
            "macro " + fmt(full.macro_1to2) + " vs chance " + fmt(full.chance_macro_1to2) + " (gap " + fmt(gap) +
                ", need >= 0.20); binary" + binaries + " (need >= 0.70); total wall time " + fmt(minutes) + " min");
  }
  {
    const auto& ns = by_mode[TrainMode::NoSem]->median;
    const auto& rd = by_mode[TrainMode::RecDannOnly]->median;
    const auto& ng = by_mode[TrainMode::NoGan]->median;
    const double ratio_sem = ns.mean_embedding_distance() / full.mean_embedding_distance();
    const double ratio_tv = ng.roughness_1to2 / full.roughness_1to2;
    verdict(ok(TrainMode::FullXgan) && ok(TrainMode::NoSem) && ratio_sem >= 2.0, "6a no_sem embedding distance",
            fmt(ns.mean_embedding_distance()) + " vs full " + fmt(full.mean_embedding_distance()) + " (ratio " +
                fmt(ratio_sem) + ", need >= 2)");
    verdict(ok(TrainMode::FullXgan) && ok(TrainMode::RecDannOnly) && rd.macro_1to2 > rd.chance_macro_1to2 &&
                rd.macro_1to2 < full.macro_1to2,
            "6b rec_dann_only preservation",
            fmt(rd.macro_1to2) + " (chance " + fmt(rd.chance_macro_1to2) + ", full " + fmt(full.macro_1to2) + ")");
    verdict(ok(TrainMode::FullXgan) && ok(TrainMode::NoGan) && ratio_tv >= 1.5, "6c no_gan roughness",
            fmt(ng.roughness_1to2) + " vs full " + fmt(full.roughness_1to2) + " (ratio " + fmt(ratio_tv) +
                ", need >= 1.5)");
  }
  {
    const auto& hd = by_mode[TrainMode::HighDann]->median;
    const double gap = hd.macro_1to2 - hd.chance_macro_1to2;
    verdict(ok(TrainMode::HighDann) && hd.domain_confusion > 0.9 && std::abs(gap) <= 0.10, "7 high domain weight",
            "confusion " + fmt(hd.domain_confusion) + " (need > 0.9), preservation gap to chance " + fmt(gap) +
                " (need within 0.10)");
  }
  return failed;
}
