#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.hpp"
#include "mmts/distribution.hpp"
#include "mmts/embeddings.hpp"
#include "mmts/errors.hpp"
#include "mmts/gradcheck.hpp"
#include "mmts/loss.hpp"
#include "mmts/retrieval.hpp"
#include "mmts/schedule.hpp"
#include "mmts/synthdata.hpp"
#include "mmts/trainer.hpp"

namespace mmts::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kDatasetSidecar = "dataset.json";

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArgumentError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

// Accepts either a bare schedule object or a training config with a
// "schedule" member.
ScheduleConfig schedule_from_json(const json& j) {
  return j.contains("schedule") ? j.at("schedule").get<ScheduleConfig>() : j.get<ScheduleConfig>();
}

struct LoadedDataset {
  PairedDataset train;
  std::optional<PairedDataset> test;
  json sidecar;
  std::vector<fs::path> files;
};

LoadedDataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("data directory " + dir.string() + " does not exist");
  LoadedDataset out;
  out.sidecar = read_json(dir / kDatasetSidecar);
  auto read_split = [&](const std::string& prefix, const json& meta) {
    PairedDataset d;
    d.v_raw = load_embeddings(dir / (prefix + "v.mme")).matrix();
    d.t_raw = load_embeddings(dir / (prefix + "t.mme")).matrix();
    d.labels = meta.at("labels").get<std::vector<std::size_t>>();
    d.sizes = meta.at("sizes").get<std::vector<std::int64_t>>();
    if (d.v_raw.rows() != d.labels.size() || d.t_raw.rows() != d.labels.size())
      throw ValidationError("dataset " + dir.string() + ": label count does not match rows");
    out.files.push_back(dir / (prefix + "v.mme"));
    out.files.push_back(dir / (prefix + "t.mme"));
    return d;
  };
  try {
    out.train = read_split("", out.sidecar.at("train"));
    if (out.sidecar.contains("test")) out.test = read_split("test_", out.sidecar.at("test"));
  } catch (const json::exception& e) {
    throw ValidationError("dataset sidecar: " + std::string(e.what()));
  }
  out.files.push_back(dir / kDatasetSidecar);
  return out;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v <= 0) throw ArgumentError("K values must be positive");
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ArgumentError("cannot parse K list '" + text + "'");
    }
  }
  return ks;
}

Matrix load_similarity_fixture(const fs::path& path) {
  if (path.extension() == ".json") {
    const json j = read_json(path);
    try {
      const auto rows = j.get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw ValidationError("similarity fixture is empty");
      Matrix m(rows.size(), rows.front().size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) throw ValidationError("similarity fixture rows differ in length");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
      }
      return m;
    } catch (const json::exception& e) {
      throw ValidationError("similarity fixture: " + std::string(e.what()));
    }
  }
  return load_embeddings(path).matrix();
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const fs::path spec_path = a.spec;
  const auto spec = read_json(spec_path).get<SyntheticDatasetSpec>();
  const fs::path dir = a.out;
  ensure_dir(dir);

  const PairedDataset train = generate(spec);
  json sidecar{{"spec", spec},
               {"train", {{"labels", train.labels}, {"sizes", train.sizes}}}};
  std::vector<fs::path> outputs{dir / "v.mme", dir / "t.mme"};
  save_embeddings(dir / "v.mme", train.v_raw);
  save_embeddings(dir / "t.mme", train.t_raw);
  if (spec.test_per_cluster > 0) {
    const PairedDataset test = generate_test_split(spec);
    sidecar["test"] = {{"labels", test.labels}, {"sizes", test.sizes}};
    save_embeddings(dir / "test_v.mme", test.v_raw);
    save_embeddings(dir / "test_t.mme", test.t_raw);
    outputs.push_back(dir / "test_v.mme");
    outputs.push_back(dir / "test_t.mme");
  }
  write_json(dir / kDatasetSidecar, sidecar);
  outputs.push_back(dir / kDatasetSidecar);

  RunManifest m;
  m.command = "synth";
  m.config = spec;
  m.seed = spec.seed;
  write_manifest(dir / kManifest, m, {spec_path}, outputs);
  out << "synth: " << train.count() << " pairs in " << train.sizes.size() << " clusters -> "
      << dir.string() << '\n';
  return kSuccess;
}

// -------------------------------------------------------------- cluster

struct ClusterArgs {
  std::string embeddings;
  std::size_t k = 200;
  std::int64_t seed = 42;
  double sh_minus = 0.0;
  double sh_plus = 0.0;
  std::size_t max_iters = 300;
  double tol = 1e-6;
  std::string out;
  unsigned threads = 1;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  if (a.sh_minus > a.sh_plus) throw ArgumentError("--sh-minus must be <= --sh-plus");
  const EmbeddingMatrix emb = load_embeddings(a.embeddings);
  KMeansOptions options{a.k, a.seed, a.max_iters, a.tol, a.threads};
  const KMeansModel model = kmeans_fit(emb, options);
  const ShiftTable table = build_shift_table(model, emb, a.sh_minus, a.sh_plus);

  const fs::path out_path = a.out;
  ensure_parent(out_path);
  write_json(out_path, table);
  RunManifest m;
  m.command = "cluster";
  m.config = {{"k", a.k},
              {"seed", a.seed},
              {"sh_minus", a.sh_minus},
              {"sh_plus", a.sh_plus},
              {"max_iters", a.max_iters},
              {"tol", a.tol},
              {"inertia", model.inertia},
              {"iterations_run", model.iterations_run}};
  m.seed = a.seed;
  write_manifest(sidecar_manifest_path(out_path), m, {a.embeddings}, {out_path});
  out << "cluster: k=" << a.k << " inertia=" << format_real(model.inertia)
      << " iterations=" << model.iterations_run << " -> " << out_path.string() << '\n';
  return kSuccess;
}

// ------------------------------------------------------------- schedule

struct ScheduleArgs {
  std::string config;
  std::string shifts;
  std::int64_t iters = 1;
  std::string out;
};

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  const ScheduleConfig config = schedule_from_json(read_json(a.config));
  ShiftTable table;
  std::vector<fs::path> inputs{a.config};
  if (!a.shifts.empty()) {
    table = read_json(a.shifts).get<ShiftTable>();
    inputs.emplace_back(a.shifts);
  } else {
    // Without a table, dump the two extreme clusters.
    table = shift_table_from_sizes({0, 1}, {}, config.sh_minus, config.sh_plus);
  }
  const auto rows = schedule_dump(table, config, a.iters);
  const fs::path out_path = a.out;
  ensure_parent(out_path);
  std::ostringstream tsv;
  write_schedule_tsv(tsv, rows);
  write_text(out_path, tsv.str());

  RunManifest m;
  m.command = "schedule";
  m.config = {{"schedule", config}, {"iters", a.iters}};
  write_manifest(sidecar_manifest_path(out_path), m, inputs, {out_path});
  out << "schedule: " << rows.size() << " rows -> " << out_path.string() << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string config;
  std::string mode;
  std::string shifts;
  std::string out;
  unsigned threads = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainConfig config = read_json(a.config).get<TrainConfig>();
  if (!a.mode.empty()) config.mode = train_mode_from_string(a.mode);
  config.threads = a.threads;
  config.validate();

  const LoadedDataset data = load_dataset(a.data);
  std::vector<fs::path> inputs = data.files;
  inputs.emplace_back(a.config);
  ShiftTable table;
  if (!a.shifts.empty()) {
    table = read_json(a.shifts).get<ShiftTable>();
    inputs.emplace_back(a.shifts);
  } else {
    table = make_shift_table(data.train, config);
  }

  const TrainResult result = train(data.train, table, config);

  const fs::path dir = a.out;
  ensure_dir(dir);
  std::ostringstream log;
  log << "iter\tloss\ttau_min\ttau_max\n";
  for (const auto& row : result.log)
    log << row.iter << '\t' << format_real(row.loss) << '\t' << format_real(row.tau_min) << '\t'
        << format_real(row.tau_max) << '\n';
  write_text(dir / "log.tsv", log.str());
  save_embeddings(dir / "w_v.mme", result.model.w_v);
  save_embeddings(dir / "w_t.mme", result.model.w_t);
  write_json(dir / "shifts.json", table);

  RunManifest m;
  m.command = "train";
  json cfg = config;
  cfg["data_dir"] = fs::absolute(a.data).lexically_normal().string();
  cfg["shifts_from"] = a.shifts.empty() ? std::string(to_string(config.shift_table_source)) : a.shifts;
  m.config = cfg;
  m.seed = config.seed;
  write_manifest(dir / kManifest, m, inputs,
                 {dir / "log.tsv", dir / "w_v.mme", dir / "w_t.mme", dir / "shifts.json"});
  const double last = result.log.empty() ? 0.0 : result.log.back().loss;
  out << "train: mode=" << to_string(config.mode) << " loss=" << to_string(config.schedule.loss_kind)
      << " iters=" << config.total_iters << " final_loss=" << format_real(last) << " -> "
      << dir.string() << '\n';
  return kSuccess;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string run;
  std::string relevancy = "diagonal";
  std::string ks = "1,5,10";
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const fs::path run_dir = a.run;
  if (!fs::is_directory(run_dir)) throw IoError("run directory " + run_dir.string() + " does not exist");
  if (a.relevancy != "diagonal" && a.relevancy != "cluster")
    throw ArgumentError("--relevancy must be 'diagonal' or 'cluster'");

  SimilarityMatrix sims;
  std::optional<std::vector<std::size_t>> labels;
  std::optional<std::vector<std::int64_t>> sizes;
  std::vector<fs::path> inputs;

  if (fs::exists(run_dir / "similarities.mme") || fs::exists(run_dir / "similarities.json")) {
    const fs::path fixture = fs::exists(run_dir / "similarities.mme") ? run_dir / "similarities.mme"
                                                                      : run_dir / "similarities.json";
    sims = {load_similarity_fixture(fixture), Direction::v_to_t};
    inputs.push_back(fixture);
    if (fs::exists(run_dir / "labels.json")) {
      const json j = read_json(run_dir / "labels.json");
      labels = j.at("labels").get<std::vector<std::size_t>>();
      sizes = j.at("sizes").get<std::vector<std::int64_t>>();
      inputs.push_back(run_dir / "labels.json");
    }
  } else {
    const RunManifest manifest = read_manifest(run_dir / kManifest);
    if (manifest.command != "train")
      throw ArgumentError(run_dir.string() + " is not a training run");
    const LoadedDataset data = load_dataset(manifest.config.at("data_dir").get<std::string>());
    TwoTowerModel model{load_embeddings(run_dir / "w_v.mme").matrix(),
                        load_embeddings(run_dir / "w_t.mme").matrix()};
    const PairedDataset& split = data.test ? *data.test : data.train;
    const Embeddings emb = forward(model, split.v_raw, split.t_raw);
    sims = {matmul_transpose_b(emb.unit_v, emb.unit_t), Direction::v_to_t};
    labels = split.labels;
    sizes = data.train.sizes;
    inputs = {run_dir / kManifest, run_dir / "w_v.mme", run_dir / "w_t.mme"};
    inputs.insert(inputs.end(), data.files.begin(), data.files.end());
  }

  std::vector<std::size_t> ks;
  for (std::size_t k : parse_ks(a.ks))
    if (k <= sims.size()) ks.push_back(k);

  if (a.relevancy == "cluster" && !labels)
    throw ArgumentError("cluster relevancy needs labels (labels.json in the run directory)");
  const RelevancyMatrix relevancy = a.relevancy == "cluster"
                                        ? RelevancyMatrix::same_cluster(*labels, *labels)
                                        : RelevancyMatrix::diagonal(sims.size());
  MetricsReport report = evaluate(sims, relevancy, ks);
  if (labels && sizes) report.per_cluster = stratified_report(sims, *labels, *sizes, ks);

  const fs::path out_path = a.out;
  ensure_parent(out_path);
  write_text(out_path, metrics_json_text(report));
  RunManifest m;
  m.command = "eval";
  m.config = {{"run", fs::absolute(run_dir).lexically_normal().string()},
              {"relevancy", a.relevancy},
              {"ks", ks}};
  write_manifest(sidecar_manifest_path(out_path), m, inputs, {out_path});
  out << "eval: N=" << sims.size() << " mAP(v2t)=" << format_real(report.map_v2t)
      << " nDCG(v2t)=" << format_real(report.ndcg_v2t) << " -> " << out_path.string() << '\n';
  return kSuccess;
}

// ------------------------------------------------------------ gradcheck

struct GradcheckArgs {
  std::size_t trials = 100;
  std::int64_t seed = 0;
  std::string out;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradCheckOptions options;
  options.trials = a.trials;
  options.seed = a.seed;
  const GradCheckReport report = run_gradcheck(options);
  for (const auto& t : report.trials) {
    out << (t.passed ? "PASS" : "FAIL") << '\t' << t.index << '\t' << to_string(t.loss)
        << "\tN=" << t.batch << "\td=" << t.dim << "\tsim_err=" << format_real(t.similarity_error)
        << "\temb_err=" << format_real(t.embedding_error) << '\n';
  }
  out << "gradcheck: " << report.trials.size() << " trials, max relative error "
      << format_real(report.max_error) << ", " << (report.all_passed ? "all passed" : "FAILED")
      << '\n';
  if (!a.out.empty()) {
    const fs::path out_path = a.out;
    ensure_parent(out_path);
    write_json(out_path, report);
    RunManifest m;
    m.command = "gradcheck";
    m.config = {{"trials", a.trials}, {"step", options.step}, {"tolerance", options.tolerance}};
    m.seed = a.seed;
    write_manifest(sidecar_manifest_path(out_path), m, {}, {out_path});
  }
  return report.all_passed ? kSuccess : kNumericError;
}

// -------------------------------------------------------------- profile

struct ProfileArgs {
  std::string similarities;
  std::size_t anchor = 0;
  std::string taus = "0.05,0.1,0.2,0.5,1.0";
  std::string out;
};

int cmd_profile(const ProfileArgs& a, std::ostream& out) {
  const SimilarityMatrix sims{load_similarity_fixture(a.similarities), Direction::v_to_t};
  std::vector<double> taus;
  {
    std::stringstream ss(a.taus);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        taus.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw ArgumentError("cannot parse temperature list '" + a.taus + "'");
      }
    }
  }
  if (taus.empty()) throw ArgumentError("--taus must list at least one temperature");

  const fs::path dir = a.out;
  ensure_dir(dir);
  std::vector<fs::path> outputs;
  std::ostringstream summary;
  summary << "tau\tentropy\thard_easy_ratio\n";
  for (double tau : taus) {
    const auto profile = negative_contribution_profile(sims, tau, a.anchor);
    std::ostringstream tsv;
    tsv << "rank\tsimilarity\tcontribution\n";
    for (std::size_t r = 0; r < profile.size(); ++r)
      tsv << r + 1 << '\t' << format_real(profile[r].similarity) << '\t'
          << format_real(profile[r].contribution) << '\n';
    const fs::path file = dir / ("profile_tau_" + format_real(tau) + ".tsv");
    write_text(file, tsv.str());
    outputs.push_back(file);
    const double ratio =
        profile.empty() ? 1.0 : profile.front().contribution / profile.back().contribution;
    summary << format_real(tau) << '\t' << format_real(contribution_entropy(profile)) << '\t'
            << format_real(ratio) << '\n';
  }
  write_text(dir / "summary.tsv", summary.str());
  outputs.push_back(dir / "summary.tsv");

  RunManifest m;
  m.command = "profile";
  m.config = {{"anchor", a.anchor}, {"taus", taus}};
  write_manifest(dir / kManifest, m, {a.similarities}, outputs);
  out << "profile: " << taus.size() << " temperatures -> " << dir.string() << '\n';
  return kSuccess;
}

// --------------------------------------------------------------- verify

int cmd_verify(const std::string& manifest, std::ostream& out) {
  const VerifyResult result = verify_manifest(manifest);
  for (const auto& m : result.mismatches) out << "MISMATCH\t" << m << '\n';
  out << "verify: " << (result.ok ? "ok" : "failed") << '\n';
  return result.ok ? kSuccess : kArgumentError;
}

}  // namespace

std::string metrics_json_text(const MetricsReport& report) { return json(report).dump(2) + "\n"; }

unsigned default_threads() {
  if (const char* env = std::getenv("MMTS_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::logic_error&) {
    }
  }
  return 1;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-modal temperature and margin schedules"};
  app.require_subcommand(1);
  unsigned threads = default_threads();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a paired long-tail dataset");
  synth_cmd->add_option("--spec", synth.spec, "Dataset spec JSON")->required();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  ClusterArgs cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "K-Means shift table from embeddings");
  cluster_cmd->add_option("--embeddings", cluster.embeddings, "MME embedding file")->required();
  cluster_cmd->add_option("--k", cluster.k, "Cluster count")->capture_default_str();
  cluster_cmd->add_option("--seed", cluster.seed, "k-means++ seed")->capture_default_str();
  cluster_cmd->add_option("--sh-minus", cluster.sh_minus, "Shift of the smallest cluster")->required();
  cluster_cmd->add_option("--sh-plus", cluster.sh_plus, "Shift of the largest cluster")->required();
  cluster_cmd->add_option("--max-iters", cluster.max_iters)->capture_default_str();
  cluster_cmd->add_option("--tol", cluster.tol)->capture_default_str();
  cluster_cmd->add_option("--out", cluster.out, "Shift table JSON")->required();
  cluster_cmd->add_option("--threads", threads, "Worker threads");

  ScheduleArgs schedule;
  auto* schedule_cmd = app.add_subcommand("schedule", "Dump per-cluster temperatures");
  schedule_cmd->add_option("--config", schedule.config, "Schedule or training config JSON")->required();
  schedule_cmd->add_option("--shifts", schedule.shifts, "Shift table JSON");
  schedule_cmd->add_option("--iters", schedule.iters, "Iterations to dump")->required();
  schedule_cmd->add_option("--out", schedule.out, "Output TSV")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the two-tower toy model");
  train_cmd->add_option("--data", train_args.data, "Directory written by synth")->required();
  train_cmd->add_option("--config", train_args.config, "Training config JSON")->required();
  train_cmd->add_option("--mode", train_args.mode, "fixed | ts_only | ics_only | ts_and_ics");
  train_cmd->add_option("--shifts", train_args.shifts, "Precomputed shift table JSON");
  train_cmd->add_option("--out", train_args.out, "Run directory")->required();
  train_cmd->add_option("--threads", threads, "Worker threads");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Retrieval metrics for a run");
  eval_cmd->add_option("--run", eval.run, "Run directory or fixture directory")->required();
  eval_cmd->add_option("--relevancy", eval.relevancy, "diagonal | cluster")->capture_default_str();
  eval_cmd->add_option("--ks", eval.ks, "Recall cut-offs")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "Metrics JSON")->required();

  GradcheckArgs gradcheck;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck_cmd->add_option("--trials", gradcheck.trials, "Trials per loss")->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck.seed)->capture_default_str();
  gradcheck_cmd->add_option("--out", gradcheck.out, "Optional JSON report");

  ProfileArgs profile;
  auto* profile_cmd = app.add_subcommand("profile", "Negative contribution profiles per temperature");
  profile_cmd->add_option("--similarities", profile.similarities, "Square similarity fixture (.mme or .json)")
      ->required();
  profile_cmd->add_option("--anchor", profile.anchor)->capture_default_str();
  profile_cmd->add_option("--taus", profile.taus)->capture_default_str();
  profile_cmd->add_option("--out", profile.out, "Output directory")->required();

  std::string manifest_path;
  auto* verify_cmd = app.add_subcommand("verify", "Re-check every digest in a manifest");
  verify_cmd->add_option("--manifest", manifest_path)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  }

  try {
    if (threads < 1) throw ArgumentError("--threads must be >= 1");
    cluster.threads = threads;
    train_args.threads = threads;
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*cluster_cmd) return cmd_cluster(cluster, out);
    if (*schedule_cmd) return cmd_schedule(schedule, out);
    if (*train_cmd) return cmd_train(train_args, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*gradcheck_cmd) return cmd_gradcheck(gradcheck, out);
    if (*profile_cmd) return cmd_profile(profile, out);
    if (*verify_cmd) return cmd_verify(manifest_path, out);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}

}  // namespace mmts::cli
