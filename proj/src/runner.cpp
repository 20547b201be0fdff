// SPDX-License-Identifier: Apache-2.0
#include "mfpg/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace mfpg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeAbort("cannot write '" + path.string() + "'");
  out << content;
}

void ensure_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("output path '" + dir.string() + "' is a file");
    if (!fs::is_empty(dir) && !force) {
      throw ConfigError("output directory '" + dir.string() +
                        "' is not empty; pass --force to overwrite");
    }
  } else {
    fs::create_directories(dir);
  }
}

struct SeedResult {
  std::uint64_t seed = 0;
  TrainResult train;
};

std::vector<SeedResult> train_all_seeds(const ExperimentConfig& cfg, int workers) {
  MultiFidelityPair proto = build_pair(cfg.env);
  const std::size_t n = cfg.run.seeds.size();
  std::vector<SeedResult> results(n);
  workers = std::max(1, workers);

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      results[i].seed = cfg.run.seeds[i];
      results[i].train = train(cfg.trainer, proto, cfg.run.seeds[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

std::string curves_csv(const std::vector<SeedResult>& results, int eval_episodes) {
  std::string out = "seed,hf_step,mean_return";
  for (int e = 0; e < eval_episodes; ++e) out += ",ep_return_" + std::to_string(e);
  out += "\n";
  for (const SeedResult& r : results) {
    for (const EvalPoint& p : r.train.curve.points) {
      out += std::to_string(r.seed) + "," + std::to_string(p.step) + "," + fmt(p.mean_return);
      for (double er : p.episode_returns) out += "," + fmt(er);
      out += "\n";
    }
  }
  return out;
}

std::string diagnostics_csv(const std::vector<SeedResult>& results) {
  std::string out =
      "seed,iter,hf_steps,rho_batch,rho_ema,s_high_ema,s_low_ema,c_star,cv_active,surrogate,"
      "hf_only_scalar,vf_loss\n";
  for (const SeedResult& r : results) {
    for (const IterationRecord& rec : r.train.records) {
      out += std::to_string(r.seed) + "," + std::to_string(rec.iteration) + "," +
             std::to_string(rec.hf_steps_consumed) + "," + fmt(rec.rho_batch) + "," +
             fmt(rec.rho_ema) + "," + fmt(rec.s_high_ema) + "," + fmt(rec.s_low_ema) + "," +
             fmt(rec.c_star) + "," + (rec.cv_active ? "1" : "0") + "," + fmt(rec.surrogate) + "," +
             fmt(rec.hf_only_scalar) + "," + fmt(rec.vf_loss) + "\n";
    }
  }
  return out;
}

json bootstrap_json(const BootstrapResult& b) {
  return json{{"point", b.point}, {"ci_low", b.ci_low}, {"ci_high", b.ci_high},
              {"resamples", b.resamples}};
}

json summary_json(const ExperimentConfig& cfg, const std::vector<SeedResult>& results,
                  const std::optional<fs::path>& baseline_dir) {
  json per_seed = json::array();
  std::vector<double> finals, aucs;
  for (const SeedResult& r : results) {
    const double fr = final_return(r.train.curve);
    const double a = r.train.curve.points.size() >= 2 ? auc(r.train.curve) : 0.0;
    finals.push_back(fr);
    aucs.push_back(a);
    per_seed.push_back(json{{"seed", r.seed},
                            {"final_return", fr},
                            {"auc", a},
                            {"hf_steps", r.train.hf_steps_consumed},
                            {"aborted", r.train.aborted}});
  }
  json out;
  out["per_seed"] = per_seed;
  const int R = cfg.run.bootstrap_resamples;
  const double level = cfg.run.bootstrap_level;
  if (finals.size() >= 2) {
    Rng rng_f(derive_seed(cfg.hash(), "bootstrap-final"));
    Rng rng_a(derive_seed(cfg.hash(), "bootstrap-auc"));
    out["final_return"] = bootstrap_json(bootstrap_mean_ci(finals, R, level, rng_f));
    out["auc"] = bootstrap_json(bootstrap_mean_ci(aucs, R, level, rng_a));
  }
  if (baseline_dir) {
    SummaryMetrics base = read_summary_metrics(*baseline_dir);
    Rng rng_df(derive_seed(cfg.hash(), "bootstrap-delta-final"));
    Rng rng_da(derive_seed(cfg.hash(), "bootstrap-delta-auc"));
    json delta;
    delta["final_return"] =
        bootstrap_json(bootstrap_diff_ci(finals, base.final_returns, R, level, rng_df));
    delta["auc"] = bootstrap_json(bootstrap_diff_ci(aucs, base.aucs, R, level, rng_da));
    delta["baseline_dir"] = baseline_dir->string();
    out["delta_vs_baseline"] = delta;
  }
  return out;
}

}  // namespace

void save_checkpoint_file(const Checkpoint& ck, const fs::path& path) {
  std::string out = "mfpg-checkpoint v1\n";
  out += "step " + std::to_string(ck.step) + "\n";
  auto dump = [&out](const char* label, const std::vector<Tensor>& ts) {
    out += std::string(label) + " " + std::to_string(ts.size()) + "\n";
    for (const Tensor& t : ts) {
      out += "tensor";
      for (std::size_t d : t.shape()) out += " " + std::to_string(d);
      out += "\n";
      for (double v : t.data()) out += fmt(v) + "\n";
    }
  };
  dump("policy", ck.policy_params);
  dump("value", ck.value_params);
  write_text_file(path, out);
}

Checkpoint load_checkpoint_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeAbort("cannot read checkpoint '" + path.string() + "'");
  std::string magic, version;
  in >> magic >> version;
  if (magic != "mfpg-checkpoint" || version != "v1") {
    throw RuntimeAbort("'" + path.string() + "' is not a checkpoint file");
  }
  Checkpoint ck;
  std::string word;
  in >> word >> ck.step;
  auto read_group = [&](std::vector<Tensor>& ts) {
    std::size_t count = 0;
    in >> word >> count;
    std::string line;
    std::getline(in, line);
    for (std::size_t i = 0; i < count; ++i) {
      std::getline(in, line);
      std::vector<std::size_t> shape;
      {
        std::istringstream hdr(line);
        std::string tag;
        hdr >> tag;
        std::size_t d;
        while (hdr >> d) shape.push_back(d);
      }
      Tensor t(shape);
      for (std::size_t j = 0; j < t.size(); ++j) {
        std::getline(in, line);
        t[j] = std::strtod(line.c_str(), nullptr);
      }
      ts.push_back(std::move(t));
    }
  };
  read_group(ck.policy_params);
  read_group(ck.value_params);
  if (!in) throw RuntimeAbort("truncated checkpoint '" + path.string() + "'");
  return ck;
}

SummaryMetrics read_summary_metrics(const fs::path& run_dir) {
  const fs::path path = run_dir / "summary.json";
  std::ifstream in(path);
  if (!in) throw RuntimeAbort("cannot read '" + path.string() + "'");
  json j;
  in >> j;
  SummaryMetrics m;
  for (const json& row : j.at("per_seed")) {
    m.final_returns.push_back(row.at("final_return").get<double>());
    m.aucs.push_back(row.at("auc").get<double>());
    m.seeds.push_back(row.at("seed").get<std::uint64_t>());
  }
  return m;
}

RunManifest run_experiment(const RunRequest& request) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig& cfg = request.config;
  ensure_out_dir(request.out_dir, request.force);

  std::vector<SeedResult> results = train_all_seeds(cfg, request.workers);

  RunManifest manifest;
  manifest.config_hash = cfg.hash();
  manifest.code_version = kCodeVersion;
  manifest.seeds = cfg.run.seeds;

  const fs::path curves_path = request.out_dir / "curves.csv";
  const fs::path diag_path = request.out_dir / "diagnostics.csv";
  const fs::path summary_path = request.out_dir / "summary.json";
  const fs::path manifest_path = request.out_dir / "manifest.json";
  const fs::path config_path = request.out_dir / "config.ini";

  write_text_file(curves_path, curves_csv(results, cfg.trainer.eval_episodes));
  write_text_file(diag_path, diagnostics_csv(results));
  write_text_file(summary_path, summary_json(cfg, results, request.baseline_dir).dump(2) + "\n");
  manifest.files["curves"] = curves_path.string();
  manifest.files["diagnostics"] = diag_path.string();
  manifest.files["summary"] = summary_path.string();

  {
    std::string cfg_text;
    std::string last_section;
    for (const auto& [key, value] : cfg.to_map()) {
      const auto dot = key.find('.');
      const std::string section = key.substr(0, dot);
      if (section != last_section) {
        cfg_text += "[" + section + "]\n";
        last_section = section;
      }
      cfg_text += key.substr(dot + 1) + " = " + value + "\n";
    }
    write_text_file(config_path, cfg_text);
    manifest.files["config"] = config_path.string();
  }

  if (cfg.trainer.checkpoint_interval > 0) {
    for (const SeedResult& r : results) {
      const fs::path dir = request.out_dir / "checkpoints" / ("seed" + std::to_string(r.seed));
      fs::create_directories(dir);
      for (const Checkpoint& ck : r.train.checkpoints) {
        save_checkpoint_file(ck, dir / ("ckpt_" + std::to_string(ck.step) + ".txt"));
      }
      manifest.files["checkpoints.seed" + std::to_string(r.seed)] = dir.string();
    }
    manifest.files["checkpoints"] = (request.out_dir / "checkpoints").string();
  }

  bool any_aborted = false;
  std::string abort_reason;
  for (const SeedResult& r : results) {
    if (r.train.aborted) {
      any_aborted = true;
      abort_reason = "seed " + std::to_string(r.seed) + ": " + r.train.abort_reason;
    }
  }

  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    char hash_hex[19];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, manifest.config_hash);
    std::string curve_columns = "seed,hf_step,mean_return";
    for (int e = 0; e < cfg.trainer.eval_episodes; ++e) {
      curve_columns += ",ep_return_" + std::to_string(e);
    }
    json j{{"config_hash", hash_hex},
           {"code_version", manifest.code_version},
           {"seeds", manifest.seeds},
           {"files", manifest.files},
           {"schema",
            {{"curves", curve_columns},
             {"diagnostics",
              "seed,iter,hf_steps,rho_batch,rho_ema,s_high_ema,s_low_ema,c_star,cv_active,"
              "surrogate,hf_only_scalar,vf_loss"}}},
           {"duration_seconds", manifest.duration_seconds}};
    write_text_file(manifest_path, j.dump(2) + "\n");
  }

  if (any_aborted) throw RuntimeAbort("training aborted: " + abort_reason);
  return manifest;
}

std::vector<RunManifest> sweep(const ExperimentConfig& base, const std::string& axis,
                               const std::vector<std::string>& values, const fs::path& out_dir,
                               bool force, int workers) {
  const std::vector<std::string> keys = known_config_keys();
  if (std::find(keys.begin(), keys.end(), axis) == keys.end()) {
    std::string msg = "unknown sweep axis '" + axis + "'; valid axes:";
    for (const std::string& k : keys) msg += "\n  " + k;
    throw ConfigError(msg);
  }
  if (values.empty()) throw ConfigError("sweep: empty value list");

  std::vector<RunManifest> manifests;
  for (const std::string& value : values) {
    ConfigMap map = base.to_map();
    map[axis] = value;
    RunRequest req;
    req.config = experiment_config_from_map(map);  // re-validate with the override
    req.out_dir = out_dir / (axis + "=" + value);
    req.force = force;
    req.workers = workers;
    manifests.push_back(run_experiment(req));
  }
  return manifests;
}

std::filesystem::path variance_report(const ExperimentConfig& config,
                                      const fs::path& checkpoint_dir, const fs::path& out_csv) {
  if (!fs::exists(checkpoint_dir)) {
    throw RuntimeAbort("checkpoint directory '" + checkpoint_dir.string() + "' does not exist");
  }
  // checkpoint_dir holds seedNN/ckpt_STEP.txt trees (as written by run()).
  std::vector<std::pair<std::uint64_t, std::vector<Checkpoint>>> per_seed;
  for (const auto& seed_entry : fs::directory_iterator(checkpoint_dir)) {
    if (!seed_entry.is_directory()) continue;
    const std::string name = seed_entry.path().filename().string();
    if (name.rfind("seed", 0) != 0) continue;
    std::vector<Checkpoint> cks;
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(seed_entry.path())) {
      if (f.path().extension() == ".txt") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) cks.push_back(load_checkpoint_file(f));
    std::sort(cks.begin(), cks.end(),
              [](const Checkpoint& a, const Checkpoint& b) { return a.step < b.step; });
    if (!cks.empty()) {
      per_seed.emplace_back(std::stoull(name.substr(4)), std::move(cks));
    }
  }
  if (per_seed.empty()) {
    throw RuntimeAbort("no checkpoints found under '" + checkpoint_dir.string() + "'");
  }
  std::sort(per_seed.begin(), per_seed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<VarianceSpec> specs;
  for (int batch : config.variance.batch_sizes) {
    for (int baseline = 0; baseline < 2; ++baseline) {
      if (baseline == 1 && !config.variance.with_baseline) continue;
      if (baseline == 0 && !config.variance.without_baseline) continue;
      specs.push_back({false, batch, baseline == 1});
      specs.push_back({true, batch, baseline == 1});
    }
  }

  VarianceStudyOptions opt;
  opt.repeats = config.variance.repeats;
  opt.pilot_batches = config.variance.pilot_batches;
  opt.low_multiplier = config.trainer.low_multiplier;
  opt.gamma = config.trainer.gamma;

  MultiFidelityPair pair = build_pair(config.env);
  std::string csv = "seed,checkpoint_step,estimator,batch_transitions,use_baseline,variance,"
                    "ratio_vs_hf_only\n";
  for (const auto& [seed, checkpoints] : per_seed) {
    std::vector<VarianceRow> rows =
        variance_study(checkpoints, pair, specs, opt, seed, config.trainer.policy_hidden,
                       config.trainer.value_hidden);
    auto find_hf = [&rows](const VarianceRow& r) -> double {
      for (const VarianceRow& h : rows) {
        if (!h.spec.mfpg && h.checkpoint_step == r.checkpoint_step &&
            h.spec.batch_transitions == r.spec.batch_transitions &&
            h.spec.use_baseline == r.spec.use_baseline) {
          return h.variance;
        }
      }
      return 0.0;
    };
    for (const VarianceRow& r : rows) {
      const double hf_var = find_hf(r);
      const double ratio = (r.spec.mfpg && hf_var > 0.0) ? r.variance / hf_var : 1.0;
      csv += std::to_string(seed) + "," + std::to_string(r.checkpoint_step) + "," +
             (r.spec.mfpg ? "mfpg" : "hf-only") + "," + std::to_string(r.spec.batch_transitions) +
             "," + (r.spec.use_baseline ? "1" : "0") + "," + fmt(r.variance) + "," + fmt(ratio) +
             "\n";
    }
  }
  fs::create_directories(out_csv.parent_path().empty() ? fs::path(".") : out_csv.parent_path());
  write_text_file(out_csv, csv);
  return out_csv;
}

std::filesystem::path summarize(const fs::path& run_dir,
                                const std::optional<fs::path>& baseline_dir) {
  SummaryMetrics m = read_summary_metrics(run_dir);
  json out;
  json per_seed = json::array();
  for (std::size_t i = 0; i < m.seeds.size(); ++i) {
    per_seed.push_back(json{{"seed", m.seeds[i]},
                            {"final_return", m.final_returns[i]},
                            {"auc", m.aucs[i]}});
  }
  out["per_seed"] = per_seed;
  if (m.final_returns.size() >= 2) {
    Rng rng_f(derive_seed(0, "summarize-final"));
    Rng rng_a(derive_seed(0, "summarize-auc"));
    out["final_return"] = bootstrap_json(bootstrap_mean_ci(m.final_returns, 10000, 0.95, rng_f));
    out["auc"] = bootstrap_json(bootstrap_mean_ci(m.aucs, 10000, 0.95, rng_a));
  }
  if (baseline_dir) {
    SummaryMetrics base = read_summary_metrics(*baseline_dir);
    Rng rng_df(derive_seed(0, "summarize-delta-final"));
    Rng rng_da(derive_seed(0, "summarize-delta-auc"));
    json delta;
    delta["final_return"] = bootstrap_json(
        bootstrap_diff_ci(m.final_returns, base.final_returns, 10000, 0.95, rng_df));
    delta["auc"] = bootstrap_json(bootstrap_diff_ci(m.aucs, base.aucs, 10000, 0.95, rng_da));
    delta["baseline_dir"] = baseline_dir->string();
    out["delta_vs_baseline"] = delta;
  }
  const fs::path path = run_dir / "summary_recomputed.json";
  write_text_file(path, out.dump(2) + "\n");
  return path;
}

}  // namespace mfpg
