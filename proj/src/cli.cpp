#include "arflow/cli.hpp"

#include <chrono>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "arflow/data.hpp"
#include "arflow/fileio.hpp"
#include "arflow/metrics.hpp"
#include "arflow/model_io.hpp"
#include "arflow/parallel.hpp"
#include "arflow/sampler.hpp"
#include "arflow/training.hpp"
#include "arflow/verify.hpp"

namespace arflow {

using Json = nlohmann::ordered_json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFiniteLoss: return kExitNonFinite;
    case ErrorCode::kSchemaError:
    case ErrorCode::kIoError:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kUnknownCondition:
    case ErrorCode::kDegenerateRotation:
    case ErrorCode::kNotARotation:
    case ErrorCode::kGridMismatch: return kExitSchema;
    case ErrorCode::kEmptyInput:
    case ErrorCode::kInsufficientSamples:
    case ErrorCode::kDegenerateCovariance: return kExitEmpty;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kGridTooLarge:
    case ErrorCode::kSingularTime: return kExitConfig;
  }
  return kExitConfig;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

Json file_entry(const std::string& path) { return Json{{"path", path}, {"sha256", file_sha256(path)}}; }

struct Manifest {
  Json doc;
  Clock::time_point start = Clock::now();

  Manifest(const std::string& command, const std::vector<std::string>& args) {
    doc["command"] = command;
    doc["argv"] = args;
    doc["config"] = Json::object();
    doc["seeds"] = Json::object();
    doc["inputs"] = Json::object();
    doc["outputs"] = Json::object();
  }

  void write(const std::string& out_path) {
    doc["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_file_atomic(manifest_path(out_path), doc.dump(2) + "\n");
  }
};

enum class SplitChoice { kTrain, kTest, kAll };

SplitChoice parse_split(const std::string& s) {
  if (s == "train") return SplitChoice::kTrain;
  if (s == "test") return SplitChoice::kTest;
  if (s == "all") return SplitChoice::kAll;
  throw Error(ErrorCode::kInvalidConfig, "split must be train, test or all");
}

std::vector<InteractionSample> select_split(const std::vector<InteractionSample>& all, SplitChoice c) {
  if (c == SplitChoice::kAll) return all;
  DatasetSplit s = split_dataset(all);
  return c == SplitChoice::kTrain ? s.train : s.test;
}

// ---- gen-data ----

struct GenDataOpts {
  int pairs = 2000;
  int frames = 16;
  int joints = 5;
  std::uint64_t seed = 0;
  double contact_fraction = 0.5;
  double noise = 0.005;
  double fps = 20.0;
  std::vector<std::string> scenarios{"push_retreat", "wave_mirror", "kick_dodge"};
  std::string out;
};

void add_gen_data(CLI::App& app, GenDataOpts& o) {
  app.add_option("--pairs", o.pairs, "number of (actor, reactor) pairs")->capture_default_str();
  app.add_option("--frames", o.frames, "frames per motion")->capture_default_str();
  app.add_option("--joints", o.joints, "skeleton joints (>= 5)")->capture_default_str();
  app.add_option("--seed", o.seed, "generator seed")->capture_default_str();
  app.add_option("--contact-fraction", o.contact_fraction, "share of near-contact pairs")->capture_default_str();
  app.add_option("--noise", o.noise, "reactor pose noise scale")->capture_default_str();
  app.add_option("--fps", o.fps, "frame rate stored in the file")->capture_default_str();
  app.add_option("--scenarios", o.scenarios, "scenario list")->delimiter(',')->capture_default_str();
  app.add_option("--out", o.out, "dataset file (JSON lines)")->required();
}

int cmd_gen_data(const GenDataOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("gen-data", args);
  ScenarioConfig cfg;
  cfg.scenarios.clear();
  for (const auto& s : o.scenarios) cfg.scenarios.push_back(parse_scenario(s));
  cfg.frames = o.frames;
  cfg.skeleton = desk_skeleton(o.joints);
  cfg.noise_scale = o.noise;
  cfg.contact_fraction = o.contact_fraction;
  cfg.fps = o.fps;
  cfg.seed = o.seed;
  if (o.pairs < 1) throw Error(ErrorCode::kInvalidConfig, "--pairs must be >= 1, got " + std::to_string(o.pairs));
  MotionFile file{cfg.skeleton, cfg.fps, generate_dataset(cfg, o.pairs)};
  save_motions(o.out, file);

  m.doc["config"] = Json{{"pairs", o.pairs},          {"frames", o.frames}, {"joints", o.joints},
                         {"contact_fraction", o.contact_fraction}, {"noise", o.noise}, {"fps", o.fps},
                         {"scenarios", o.scenarios}};
  m.doc["seeds"] = Json{{"seed", o.seed}};
  m.doc["outputs"]["dataset"] = file_entry(o.out);
  m.write(o.out);
  out << "wrote " << o.pairs << " pairs to " << o.out << "\n";
  return kExitOk;
}

// ---- train ----

struct TrainOpts {
  std::string data;
  std::string out;
  std::string loss_csv;
  std::string split = "train";
  TrainConfig train;
  PredictorConfig model;
  bool conditioned = true;
  std::string prediction = "x1";
  int log_every = 0;
};

void add_train(CLI::App& app, TrainOpts& o) {
  app.add_option("--data", o.data, "dataset file")->required();
  app.add_option("--out", o.out, "model file")->required();
  app.add_option("--loss-csv", o.loss_csv, "per-step loss CSV (default: <out>.loss.csv)");
  app.add_option("--split", o.split, "train | test | all")->capture_default_str();
  app.add_option("--steps", o.train.steps)->capture_default_str();
  app.add_option("--batch", o.train.batch_size)->capture_default_str();
  app.add_option("--lr", o.train.learning_rate)->capture_default_str();
  app.add_option("--lambda-inter", o.train.lambda_inter)->capture_default_str();
  app.add_option("--sigma-min", o.train.sigma_min)->capture_default_str();
  app.add_option("--t-grid", o.train.t_grid, "training time grid size T")->capture_default_str();
  app.add_flag("--continuous-time", o.train.continuous_time, "draw t from U[0,1) instead of the grid");
  app.add_option("--cond-dropout", o.train.cond_dropout_prob)->capture_default_str();
  app.add_option("--seed", o.train.seed)->capture_default_str();
  app.add_option("--layers", o.model.layers)->capture_default_str();
  app.add_option("--width", o.model.width)->capture_default_str();
  app.add_option("--heads", o.model.heads)->capture_default_str();
  app.add_option("--ffn-width", o.model.ffn_width)->capture_default_str();
  app.add_flag("--causal,!--no-causal", o.model.causal, "directional attention mask (online setting)");
  app.add_flag("--conditioned,!--unconditioned", o.conditioned, "feed the scenario label as condition");
  app.add_option("--prediction", o.prediction, "x1 | v")->capture_default_str();
  app.add_option("--log-every", o.log_every, "print the loss every N steps (0 = off)")->capture_default_str();
}

int cmd_train(TrainOpts o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("train", args);
  if (o.loss_csv.empty()) o.loss_csv = o.out + ".loss.csv";
  o.model.prediction_mode = parse_prediction_mode(o.prediction);
  const SplitChoice split = parse_split(o.split);
  o.train.validate();

  const MotionFile file = load_motions(o.data);
  const auto samples = select_split(file.samples, split);
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no training pairs in " + o.data);

  o.model.frame_dim = file.skeleton.frame_dim();
  o.model.max_frames = static_cast<int>(samples.front().actor.rows());
  o.model.cond_vocab = 0;
  std::vector<PairedMotion> pairs;
  pairs.reserve(samples.size());
  for (const auto& s : samples) {
    if (o.conditioned) o.model.cond_vocab = std::max(o.model.cond_vocab, s.label + 1);
    pairs.push_back({s.actor, s.reactor, o.conditioned ? std::optional<int>(s.label) : std::nullopt});
  }
  if (o.conditioned) o.model.cond_vocab = std::max(o.model.cond_vocab, kScenarioCount);
  o.model.validate();

  std::ostringstream csv;
  csv << "step,total,fm,inter\n";
  const int log_every = o.log_every;
  const TrainResult result = train(pairs, o.model, o.train, file.skeleton, [&](const StepRecord& r) {
    csv << r.step << ',' << format_double(r.loss.total) << ',' << format_double(r.loss.fm) << ','
        << format_double(r.loss.inter) << '\n';
    if (log_every > 0 && (r.step % log_every == 0)) {
      out << "step " << r.step << " total " << r.loss.total << " fm " << r.loss.fm << " inter " << r.loss.inter
          << std::endl;
    }
  });
  save_predictor(o.out, result.params);
  write_file_atomic(o.loss_csv, csv.str());

  m.doc["config"] = Json{{"split", o.split},
                         {"steps", o.train.steps},
                         {"batch", o.train.batch_size},
                         {"lr", o.train.learning_rate},
                         {"lambda_inter", o.train.lambda_inter},
                         {"sigma_min", o.train.sigma_min},
                         {"t_grid", o.train.t_grid},
                         {"continuous_time", o.train.continuous_time},
                         {"cond_dropout", o.train.cond_dropout_prob},
                         {"layers", o.model.layers},
                         {"width", o.model.width},
                         {"heads", o.model.heads},
                         {"ffn_width", o.model.ffn_width},
                         {"causal", o.model.causal},
                         {"cond_vocab", o.model.cond_vocab},
                         {"prediction", o.prediction},
                         {"frame_dim", o.model.frame_dim},
                         {"max_frames", o.model.max_frames}};
  m.doc["seeds"] = Json{{"seed", o.train.seed}};
  m.doc["inputs"]["data"] = file_entry(o.data);
  m.doc["outputs"]["model"] = file_entry(o.out);
  m.doc["outputs"]["loss_csv"] = file_entry(o.loss_csv);
  m.write(o.out);
  const auto& first = result.history.front().loss;
  const auto& last = result.history.back().loss;
  out << "trained " << o.train.steps << " steps on " << pairs.size() << " pairs: fm " << first.fm << " -> "
      << last.fm << ", total " << first.total << " -> " << last.total << "\n";
  return kExitOk;
}

// ---- sample ----

struct SampleOpts {
  std::string model;
  std::string data;
  std::string out;
  std::string split = "test";
  int limit = 0;
  SamplerConfig sampler;
  std::string mode = "x1";
  std::string guidance = "none";
};

void add_sample(CLI::App& app, SampleOpts& o) {
  app.add_option("--model", o.model, "model file")->required();
  app.add_option("--data", o.data, "dataset file providing the actor motions")->required();
  app.add_option("--out", o.out, "output motion file")->required();
  app.add_option("--split", o.split, "train | test | all")->capture_default_str();
  app.add_option("--limit", o.limit, "use only the first N pairs (0 = all)")->capture_default_str();
  app.add_option("--steps", o.sampler.steps, "grid points N")->capture_default_str();
  app.add_option("--sigma-min", o.sampler.sigma_min)->capture_default_str();
  app.add_option("--mode", o.mode, "update route: x1 | v")->capture_default_str();
  app.add_option("--guidance", o.guidance, "none | vanilla | improved")->capture_default_str();
  app.add_option("--lambda-pene", o.sampler.lambda_pene)->capture_default_str();
  app.add_option("--zeta", o.sampler.zeta)->capture_default_str();
  app.add_option("--w", o.sampler.w)->capture_default_str();
  app.add_option("--beta", o.sampler.beta)->capture_default_str();
  app.add_option("--seed", o.sampler.seed)->capture_default_str();
}

int cmd_sample(SampleOpts o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("sample", args);
  o.sampler.mode = parse_prediction_mode(o.mode);
  o.sampler.guidance = parse_guidance(o.guidance);
  o.sampler.validate();
  if (o.limit < 0) throw Error(ErrorCode::kInvalidConfig, "--limit must be >= 0");
  if (o.sampler.beta > 0.0 && o.sampler.guidance == Guidance::kVanilla) {
    throw Error(ErrorCode::kInvalidConfig, "--beta > 0 composes with guidance none or improved");
  }
  const SplitChoice split = parse_split(o.split);

  const PredictorParams params = load_predictor(o.model);
  const MotionFile file = load_motions(o.data);
  if (params.config.frame_dim != file.skeleton.frame_dim()) {
    throw Error(ErrorCode::kSchemaError, "model expects frame width " + std::to_string(params.config.frame_dim) +
                                             ", data has " + std::to_string(file.skeleton.frame_dim()));
  }
  auto samples = select_split(file.samples, split);
  if (o.limit > 0 && static_cast<int>(samples.size()) > o.limit) samples.resize(o.limit);
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no actor motions selected from " + o.data);

  const NetworkPredictor predictor(params);
  MotionFile result{file.skeleton, file.fps, samples};
  parallel_for(static_cast<int>(samples.size()), [&](int i) {
    SamplerConfig cfg = o.sampler;
    cfg.seed = derive_seed(o.sampler.seed, static_cast<std::uint64_t>(i));
    const auto& s = samples[i];
    const std::optional<int> cond =
        params.config.cond_vocab > 0 ? std::optional<int>(s.label) : std::nullopt;
    std::optional<GuidanceContext> ctx;
    if (cfg.guidance != Guidance::kNone) ctx = GuidanceContext::make(file.skeleton, s.actor);
    result.samples[i].reactor = sample(predictor, s.actor, cfg, cond, ctx ? &*ctx : nullptr);
    result.samples[i].seed_used = cfg.seed;
  });
  save_motions(o.out, result);

  m.doc["config"] = Json{{"split", o.split},
                         {"limit", o.limit},
                         {"steps", o.sampler.steps},
                         {"sigma_min", o.sampler.sigma_min},
                         {"mode", o.mode},
                         {"guidance", o.guidance},
                         {"lambda_pene", o.sampler.lambda_pene},
                         {"zeta", o.sampler.zeta},
                         {"w", o.sampler.w},
                         {"beta", o.sampler.beta}};
  m.doc["seeds"] = Json{{"seed", o.sampler.seed}, {"per_sample", "derive_seed(seed, index)"}};
  m.doc["inputs"]["model"] = file_entry(o.model);
  m.doc["inputs"]["data"] = file_entry(o.data);
  m.doc["outputs"]["samples"] = file_entry(o.out);
  m.write(o.out);
  out << "sampled " << samples.size() << " reactions to " << o.out << "\n";
  return kExitOk;
}

// ---- eval ----

struct EvalOpts {
  std::string samples;
  std::string reference;
  std::string out;
  std::vector<std::string> metrics{"iv", "if"};
  double voxel = kDefaultVoxelSize;
  std::string features = "flatten";
  int proj_dim = 32;
  std::uint64_t proj_seed = 0;
  std::string model;
  int div_subset = kDiversitySubset;
  int mm_subset = kMultimodalitySubset;
  bool with_replacement = false;
  std::uint64_t seed = 0;
};

void add_eval(CLI::App& app, EvalOpts& o) {
  app.add_option("--samples", o.samples, "motion file with (actor, reactor) pairs to score")->required();
  app.add_option("--reference", o.reference, "motion file of real pairs (needed for fid)");
  app.add_option("--out", o.out, "report file (key=value lines)");
  app.add_option("--metrics", o.metrics, "any of iv,if,fid,div,multimod")->delimiter(',')->capture_default_str();
  app.add_option("--voxel", o.voxel, "voxel edge, meters")->capture_default_str();
  app.add_option("--features", o.features, "flatten | random_projection | predictor_latent")
      ->capture_default_str();
  app.add_option("--proj-dim", o.proj_dim)->capture_default_str();
  app.add_option("--proj-seed", o.proj_seed)->capture_default_str();
  app.add_option("--model", o.model, "model file for predictor_latent features");
  app.add_option("--div-subset", o.div_subset, "S_d")->capture_default_str();
  app.add_option("--mm-subset", o.mm_subset, "S_l")->capture_default_str();
  app.add_flag("--with-replacement", o.with_replacement, "draw diversity subsets with replacement");
  app.add_option("--seed", o.seed, "subset selection seed")->capture_default_str();
}

int cmd_eval(const EvalOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("eval", args);
  if (!(o.voxel > 0.0)) throw Error(ErrorCode::kInvalidConfig, "--voxel must be positive");
  bool want_iv = false, want_if = false, want_fid = false, want_div = false, want_mm = false;
  for (const auto& name : o.metrics) {
    if (name == "iv") want_iv = true;
    else if (name == "if") want_if = true;
    else if (name == "fid") want_fid = true;
    else if (name == "div") want_div = true;
    else if (name == "multimod") want_mm = true;
    else throw Error(ErrorCode::kInvalidConfig, "unknown metric '" + name + "'");
  }
  const FeatureKind kind = parse_feature_kind(o.features);
  if (want_fid && o.reference.empty()) throw Error(ErrorCode::kInvalidConfig, "fid needs --reference");
  if (kind == FeatureKind::kPredictorLatent && o.model.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "predictor_latent features need --model");
  }

  const MotionFile file = load_motions(o.samples);
  if (file.samples.empty()) throw Error(ErrorCode::kEmptyInput, o.samples + " holds no samples");
  MetricReport report;
  report.voxel_size = o.voxel;
  report.feature_extractor = o.features;
  m.doc["inputs"]["samples"] = file_entry(o.samples);

  if (want_iv || want_if) {
    std::vector<InteractionPair> pairs;
    for (const auto& s : file.samples) pairs.push_back({s.actor, s.reactor});
    const PenetrationStats st = penetration_stats(pairs, file.skeleton, o.voxel);
    if (want_iv) report.iv = st.iv;
    if (want_if) report.if_ = st.if_;
    report.n_total = st.n_total;
    report.f_total = st.f_total;
    report.f_pene = st.f_pene;
  }

  if (want_fid || want_div || want_mm) {
    std::optional<PredictorParams> latent_model;
    FeatureExtractor ex;
    switch (kind) {
      case FeatureKind::kFlatten: ex = FeatureExtractor::flatten(); break;
      case FeatureKind::kRandomProjection: ex = FeatureExtractor::random_projection(o.proj_seed, o.proj_dim); break;
      case FeatureKind::kPredictorLatent:
        latent_model = load_predictor(o.model);
        ex = FeatureExtractor::predictor_latent(*latent_model);
        m.doc["inputs"]["model"] = file_entry(o.model);
        break;
    }
    std::vector<MotionTensor> reactors;
    for (const auto& s : file.samples) reactors.push_back(s.reactor);
    const FeatureSet feats = extract_features(reactors, file.skeleton, ex);
    if (want_fid) {
      const MotionFile ref = load_motions(o.reference);
      if (ref.samples.empty()) throw Error(ErrorCode::kEmptyInput, o.reference + " holds no samples");
      if (!(ref.skeleton == file.skeleton)) {
        throw Error(ErrorCode::kSchemaError, "reference skeleton differs from the samples' skeleton");
      }
      std::vector<MotionTensor> ref_reactors;
      for (const auto& s : ref.samples) ref_reactors.push_back(s.reactor);
      report.fid = fid(extract_features(ref_reactors, ref.skeleton, ex), feats);
      m.doc["inputs"]["reference"] = file_entry(o.reference);
    }
    if (want_div) report.diversity = diversity(feats, o.div_subset, o.seed, o.with_replacement);
    if (want_mm) {
      std::map<int, std::vector<Eigen::Index>> by_label;
      for (std::size_t i = 0; i < file.samples.size(); ++i) {
        by_label[file.samples[i].label].push_back(static_cast<Eigen::Index>(i));
      }
      std::vector<FeatureSet> classes;
      for (const auto& [label, rows] : by_label) {
        FeatureSet c(static_cast<Eigen::Index>(rows.size()), feats.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) c.row(static_cast<Eigen::Index>(r)) = feats.row(rows[r]);
        classes.push_back(std::move(c));
      }
      report.multimodality = multimodality(classes, o.mm_subset, o.seed, o.with_replacement);
    }
  }

  const std::string text = format_report(report);
  out << text;
  if (!o.out.empty()) {
    write_file_atomic(o.out, text);
    m.doc["config"] = Json{{"metrics", o.metrics},         {"voxel", o.voxel},
                           {"features", o.features},       {"proj_dim", o.proj_dim},
                           {"proj_seed", o.proj_seed},     {"div_subset", o.div_subset},
                           {"mm_subset", o.mm_subset},     {"with_replacement", o.with_replacement}};
    m.doc["seeds"] = Json{{"seed", o.seed}};
    m.doc["outputs"]["report"] = file_entry(o.out);
    m.write(o.out);
  }
  return kExitOk;
}

// ---- verify ----

struct VerifyOpts {
  std::uint64_t seed = VerifyOptions{}.seed;
  std::string mutation = "none";
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  VerifyOptions opts;
  opts.seed = o.seed;
  opts.mutation = parse_mutation(o.mutation);
  const auto results = run_verify(opts);
  out << format_verify_table(results);
  for (const auto& r : results) {
    if (!r.pass) return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Action-reaction flow matching laboratory"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every command");

  GenDataOpts gen;
  TrainOpts tr;
  SampleOpts sm;
  EvalOpts ev;
  VerifyOpts vf;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic interaction dataset");
  add_gen_data(*gen_cmd, gen);
  CLI::App* train_cmd = app.add_subcommand("train", "train the predictor");
  add_train(*train_cmd, tr);
  CLI::App* sample_cmd = app.add_subcommand("sample", "sample reactions for actor motions");
  add_sample(*sample_cmd, sm);
  CLI::App* eval_cmd = app.add_subcommand("eval", "score motion pairs");
  add_eval(*eval_cmd, ev);
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the oracle property suite");
  verify_cmd->add_option("--seed", vf.seed)->capture_default_str();
  verify_cmd->add_option("--mutation", vf.mutation, "inject a defect: none | x1_from_v | x0_hat | interpolate")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, args, out);
    if (train_cmd->parsed()) return cmd_train(tr, args, out);
    if (sample_cmd->parsed()) return cmd_sample(sm, args, out);
    if (eval_cmd->parsed()) return cmd_eval(ev, args, out);
    if (verify_cmd->parsed()) return cmd_verify(vf, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace arflow
