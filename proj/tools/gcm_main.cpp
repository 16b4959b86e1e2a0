// gcm: train, evaluate and compare group classification models from the
// command line. Every command writes a JSON run manifest next to its main
// output; `gcm run <manifest>` repeats the recorded command.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcm/baselines.hpp"
#include "gcm/dataset_io.hpp"
#include "gcm/error.hpp"
#include "gcm/evaluation.hpp"
#include "gcm/expansion.hpp"
#include "gcm/format.hpp"
#include "gcm/generator.hpp"
#include "gcm/model_io.hpp"
#include "gcm/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr const char* kToolVersion = "0.1.0";

unsigned default_threads() {
  if (const char* env = std::getenv("GCM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring GCM_THREADS='" << env << "'\n";
  }
  return 1;
}

std::string hex_digest(const fs::path& p) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(gcm::file_digest(p)));
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_file(const fs::path& p, const std::string& bytes) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw gcm::DataError(gcm::DataErrorKind::kIo, "cannot write " + p.string());
}

// Collects everything a run needs to be repeated and is written once the
// command finishes.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> args) : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "gcm";
    doc_["tool_version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["args"] = std::move(args);
    doc_["parameters"] = Json::object();
    doc_["inputs"] = Json::array();
    doc_["outputs"] = Json::array();
  }

  Json& param(const std::string& key) { return doc_["parameters"][key]; }
  void input(const fs::path& p) { doc_["inputs"].push_back({{"path", p.string()}, {"digest", hex_digest(p)}}); }
  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }
  void set(const std::string& key, Json value) { doc_[key] = std::move(value); }

  void write(const fs::path& primary) {
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file(fs::path(primary.string() + ".manifest.json"), doc_.dump(2) + "\n");
  }

 private:
  Json doc_;
  std::chrono::steady_clock::time_point start_;
};

// Feature preparation shared by train and cv.
struct FeatureFlags {
  int expand_degree = 1;
  std::optional<std::size_t> max_features;
  bool standardize = false;

  void add(CLI::App* app, bool allow_standardize) {
    app->add_option("--expand-degree", expand_degree, "Polynomial expansion degree")->capture_default_str();
    app->add_option("--max-features", max_features, "Refuse expansions wider than this");
    if (allow_standardize) app->add_flag("--standardize", standardize, "Standardize raw features first");
  }

  void record(Manifest& m) const {
    m.param("expand_degree") = expand_degree;
    m.param("max_features") = max_features ? Json(*max_features) : Json(nullptr);
    m.param("standardize") = standardize;
  }
};

struct SolverFlags {
  gcm::SolverConfig solver;
  int misvm_max_outer = 50;

  void add(CLI::App* app) {
    app->add_option("--max-iter", solver.max_iterations, "L-BFGS iteration cap")->capture_default_str();
    app->add_option("--grad-tol", solver.grad_inf_tolerance, "Gradient infinity-norm tolerance")
        ->capture_default_str();
    app->add_option("--obj-tol", solver.rel_obj_tolerance, "Relative objective change tolerance")
        ->capture_default_str();
    app->add_option("--memory", solver.memory_pairs, "L-BFGS memory pairs")->capture_default_str();
    app->add_option("--misvm-max-outer", misvm_max_outer, "MI-SVM outer iteration cap")->capture_default_str();
  }

  void record(Manifest& m) const {
    m.param("max_iter") = solver.max_iterations;
    m.param("grad_tol") = solver.grad_inf_tolerance;
    m.param("obj_tol") = solver.rel_obj_tolerance;
    m.param("memory") = solver.memory_pairs;
    m.param("misvm_max_outer") = misvm_max_outer;
  }
};

// Algorithm-dependent defaults: the SVM-style baselines use exact hinge and
// a squared-norm weight penalty unless told otherwise.
gcm::Hyperparams resolve_hp(gcm::Algorithm algo, double lambda, std::optional<double> epsilon,
                            std::optional<double> delta) {
  const bool svm_like = algo == gcm::Algorithm::kSvm || algo == gcm::Algorithm::kMiSvm;
  gcm::Hyperparams hp{lambda, epsilon.value_or(svm_like ? gcm::kSvmEpsilon : 1.0),
                      delta.value_or(svm_like ? 0.0 : 0.5)};
  hp.validate();
  return hp;
}

void record_hp(Manifest& m, const std::string& algo, const gcm::Hyperparams& hp) {
  m.param("algo") = algo;
  m.param("lambda") = hp.lambda;
  m.param("epsilon") = hp.epsilon;
  m.param("delta") = hp.delta;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string algo = "gcm";
  double lambda = 0.5;
  std::optional<double> epsilon;
  std::optional<double> delta;
  FeatureFlags features;
  SolverFlags solver;
  unsigned threads = 1;
};

int run_train(const TrainArgs& a, const std::vector<std::string>& args) {
  const gcm::Algorithm algo = gcm::parse_algorithm(a.algo);
  const gcm::Hyperparams hp = resolve_hp(algo, a.lambda, a.epsilon, a.delta);
  a.solver.solver.validate();

  const gcm::Dataset raw = gcm::load_dataset(a.data);
  gcm::ModelMetadata meta;
  meta.algorithm = gcm::to_string(algo);
  meta.hyperparams = hp;
  meta.input_dim = raw.dim();
  meta.expansion_degree = a.features.expand_degree;
  if (a.features.standardize) meta.scaler = gcm::AffineScaler::fit(raw);
  const gcm::Dataset scaled = meta.scaler ? meta.scaler->apply(raw) : raw;
  const gcm::Dataset data = gcm::expand(scaled, {a.features.expand_degree, a.features.max_features});

  gcm::TrainOptions opts;
  opts.solver = a.solver.solver;
  opts.eval.threads = a.threads;
  opts.misvm_max_outer_iterations = a.solver.misvm_max_outer;
  const gcm::TrainResult r = gcm::train(algo, data, hp, opts);
  print_warnings(r.warnings);

  meta.provenance.dataset_digest = hex_digest(a.data);
  meta.provenance.training_rows = data.rows();
  meta.provenance.iterations = r.trace.iterations;
  meta.provenance.outer_iterations = r.outer_iterations;
  meta.provenance.termination = gcm::to_string(r.trace.termination_reason);
  meta.provenance.objective = r.objective;
  ensure_parent(a.out);
  gcm::save_model({r.model, meta}, a.out);

  Manifest m("train", args);
  record_hp(m, meta.algorithm, hp);
  a.features.record(m);
  a.solver.record(m);
  m.param("threads") = a.threads;
  m.input(a.data);
  m.output(a.out);
  m.set("termination", meta.provenance.termination);
  m.set("iterations", r.trace.iterations);
  m.set("outer_iterations", r.outer_iterations);
  m.set("objective", r.objective);
  m.write(a.out);

  std::cout << meta.algorithm << ": objective " << gcm::format_double(r.objective) << ", "
            << r.trace.iterations << " iterations, " << meta.provenance.termination << "\n";
  return kExitOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string report;
  std::string groups;
};

int run_evaluate(const EvaluateArgs& a, const std::vector<std::string>& args) {
  const gcm::ModelFile mf = gcm::load_model(a.model);
  const gcm::Dataset data = gcm::prepare_features(mf.meta, gcm::load_dataset(a.data));
  const gcm::EvalReport rep = gcm::evaluate_model(mf.model, data);
  {
    std::ostringstream csv;
    gcm::write_report_csv(rep, csv);
    write_file(a.report, csv.str());
  }
  Manifest m("evaluate", args);
  m.input(a.model);
  m.input(a.data);
  m.output(a.report);
  if (!a.groups.empty()) {
    std::ostringstream csv;
    gcm::write_groups_csv(gcm::score_groups(mf.model, data), csv);
    write_file(a.groups, csv.str());
    m.output(a.groups);
  }
  m.set("candidate_auc", rep.candidate_auc);
  m.set("group_auc", rep.group_auc);
  m.write(a.report);
  std::cout << "candidate_auc " << gcm::format_double(rep.candidate_auc) << "\ngroup_auc "
            << gcm::format_double(rep.group_auc) << "\n";
  return kExitOk;
}

// --- cv --------------------------------------------------------------------

struct CvArgs {
  std::string data;
  std::string out;
  std::string algo = "gcm";
  int folds = 5;
  std::vector<double> grid = gcm::CvPlan::default_lambda_grid();
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::uint64_t seed = 0;
  FeatureFlags features;
  SolverFlags solver;
  unsigned threads = 1;
};

int run_cv(const CvArgs& a, const std::vector<std::string>& args) {
  const gcm::Algorithm algo = gcm::parse_algorithm(a.algo);
  gcm::CvPlan plan;
  plan.folds = a.folds;
  plan.lambda_grid = a.grid;
  plan.seed = a.seed;
  plan.validate();
  // Lambda is checked per grid point; validate the rest with a placeholder.
  const gcm::Hyperparams hp = resolve_hp(algo, plan.lambda_grid.front(), a.epsilon, a.delta);

  const gcm::Dataset data =
      gcm::expand(gcm::load_dataset(a.data), {a.features.expand_degree, a.features.max_features});
  gcm::TrainOptions opts;
  opts.solver = a.solver.solver;
  opts.eval.threads = a.threads;
  opts.misvm_max_outer_iterations = a.solver.misvm_max_outer;
  const gcm::CvResult r = gcm::cross_validate(data, algo, plan, hp.epsilon, hp.delta, opts);
  print_warnings(r.warnings);

  std::ostringstream csv;
  csv << "lambda,mean_group_auc,mean_candidate_auc,folds_used\n";
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    csv << gcm::format_double(r.lambdas[i]) << ',' << gcm::format_double(r.mean_group_auc[i]) << ','
        << gcm::format_double(r.mean_candidate_auc[i]) << ',' << r.folds_used[i] << '\n';
  }
  csv << "# selected lambda=" << gcm::format_double(r.best_lambda)
      << " metric=" << (r.selected_by_group_auc ? "group_auc" : "candidate_auc") << '\n';
  write_file(a.out, csv.str());

  Manifest m("cv", args);
  m.param("algo") = gcm::to_string(algo);
  m.param("epsilon") = hp.epsilon;
  m.param("delta") = hp.delta;
  m.param("folds") = plan.folds;
  m.param("lambda_grid") = plan.lambda_grid;
  m.param("seed") = plan.seed;
  a.features.record(m);
  a.solver.record(m);
  m.param("threads") = a.threads;
  m.input(a.data);
  m.output(a.out);
  m.set("best_lambda", r.best_lambda);
  m.write(a.out);
  std::cout << "best lambda " << gcm::format_double(r.best_lambda) << "\n";
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string preset = "fig5-regime";
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_pos, n_neg, min_candidates, max_candidates, dim, decoys;
  std::optional<double> key_shift, outlier_rate;
  std::string format;
};

int run_synth(const SynthArgs& a, const std::vector<std::string>& args) {
  gcm::GeneratorSpec spec = gcm::GeneratorSpec::preset(a.preset);
  spec.seed = a.seed;
  if (a.n_pos) spec.n_pos_groups = *a.n_pos;
  if (a.n_neg) spec.n_neg_groups = *a.n_neg;
  if (a.min_candidates) spec.min_candidates = *a.min_candidates;
  if (a.max_candidates) spec.max_candidates = *a.max_candidates;
  if (a.dim) spec.dim = *a.dim;
  if (a.decoys) spec.decoys_per_positive = *a.decoys;
  if (a.key_shift) spec.key_shift = *a.key_shift;
  if (a.outlier_rate) spec.outlier_rate = *a.outlier_rate;
  spec.outlier_features = std::min(spec.outlier_features, spec.dim);
  spec.validate();

  std::string format = a.format;
  if (format.empty()) format = fs::path(a.out).extension() == ".csv" ? "text" : "binary";
  ensure_parent(a.out);
  std::uint64_t rows = 0;
  if (format == "binary") {
    rows = gcm::generate_to_binary(spec, a.out);
  } else {
    const gcm::Dataset data = gcm::generate(spec);
    gcm::save_dataset(data, a.out, gcm::DatasetFormat::kText);
    rows = data.rows();
  }

  Manifest m("synth", args);
  m.param("preset") = a.preset;
  m.param("seed") = spec.seed;
  m.param("n_pos_groups") = spec.n_pos_groups;
  m.param("n_neg_groups") = spec.n_neg_groups;
  m.param("min_candidates") = spec.min_candidates;
  m.param("max_candidates") = spec.max_candidates;
  m.param("dim") = spec.dim;
  m.param("key_shift") = spec.key_shift;
  m.param("decoys_per_positive") = spec.decoys_per_positive;
  m.param("decoy_shift") = spec.decoy_shift;
  m.param("noise_scale") = spec.noise_scale;
  m.param("outlier_rate") = spec.outlier_rate;
  m.param("outlier_shift") = spec.outlier_shift;
  m.param("outlier_features") = spec.outlier_features;
  m.param("format") = format;
  m.output(a.out);
  m.set("rows", rows);
  m.set("digest", hex_digest(a.out));
  m.write(a.out);
  std::cout << rows << " rows written to " << a.out << "\n";
  return kExitOk;
}

// --- compare ---------------------------------------------------------------

struct CompareArgs {
  std::string train;
  std::string test;
  std::string out;
  double lambda = 0.5;
  double epsilon = 1.0;
  double delta = 0.5;
  SolverFlags solver;
  unsigned threads = 1;
};

int run_compare(const CompareArgs& a, const std::vector<std::string>& args) {
  const gcm::Hyperparams gcm_hp{a.lambda, a.epsilon, a.delta};
  gcm_hp.validate();
  const gcm::Dataset train = gcm::load_dataset(a.train);
  const gcm::Dataset test = gcm::load_dataset(a.test);
  if (train.dim() != test.dim()) throw gcm::DimensionError(train.dim(), test.dim());

  gcm::TrainOptions opts;
  opts.solver = a.solver.solver;
  opts.eval.threads = a.threads;
  opts.misvm_max_outer_iterations = a.solver.misvm_max_outer;

  std::ostringstream csv;
  csv << "algorithm,lambda,epsilon,delta,candidate_auc,group_auc,iterations,outer_iterations,termination\n";
  for (gcm::Algorithm algo : {gcm::Algorithm::kGcm, gcm::Algorithm::kGcmNoGroup, gcm::Algorithm::kSvm,
                              gcm::Algorithm::kMiSvm}) {
    const bool svm_like = algo == gcm::Algorithm::kSvm || algo == gcm::Algorithm::kMiSvm;
    const gcm::Hyperparams hp = svm_like ? gcm::svm_hyperparams(a.lambda) : gcm_hp;
    const gcm::TrainResult r = gcm::train(algo, train, hp, opts);
    print_warnings(r.warnings);
    const gcm::EvalReport rep = gcm::evaluate_model(r.model, test);
    csv << gcm::to_string(algo) << ',' << gcm::format_double(hp.lambda) << ',' << gcm::format_double(hp.epsilon)
        << ',' << gcm::format_double(hp.delta) << ',' << gcm::format_double(rep.candidate_auc) << ','
        << gcm::format_double(rep.group_auc) << ',' << r.trace.iterations << ',' << r.outer_iterations << ','
        << gcm::to_string(r.trace.termination_reason) << '\n';
  }
  write_file(a.out, csv.str());
  std::cout << csv.str();

  Manifest m("compare", args);
  m.param("lambda") = a.lambda;
  m.param("epsilon") = a.epsilon;
  m.param("delta") = a.delta;
  a.solver.record(m);
  m.param("threads") = a.threads;
  m.input(a.train);
  m.input(a.test);
  m.output(a.out);
  m.write(a.out);
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args, bool allow_run);

int run_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gcm::DataError(gcm::DataErrorKind::kIo, "cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw gcm::DataError(gcm::DataErrorKind::kMalformedRecord, "manifest is not JSON: " + std::string(e.what()));
  }
  if (!doc.contains("args") || !doc["args"].is_array()) {
    throw gcm::DataError(gcm::DataErrorKind::kMalformedRecord, path + " has no recorded arguments");
  }
  return dispatch(doc["args"].get<std::vector<std::string>>(), false);
}

int error_exit(const std::string& what, int code) {
  std::cerr << "error: " << what << "\n";
  return code;
}

int dispatch(const std::vector<std::string>& args, bool allow_run) {
  CLI::App app{"Group classification machine tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  const unsigned threads = default_threads();

  TrainArgs ta;
  ta.threads = threads;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--data", ta.data, "Training dataset (binary or CSV)")->required();
  train->add_option("--out", ta.out, "Model file to write")->required();
  train->add_option("--algo", ta.algo, "gcm, gcm-nogroup, svm or misvm")->capture_default_str();
  train->add_option("--lambda", ta.lambda, "Loss weight in [0, 1]")->capture_default_str();
  train->add_option("--epsilon", ta.epsilon, "Huber width (default 1, or 10 for svm/misvm)");
  train->add_option("--delta", ta.delta, "Hinge smoothing (default 0.5, or 0 for svm/misvm)");
  train->add_option("--threads", ta.threads, "Worker threads (default GCM_THREADS or 1)");
  ta.features.add(train, true);
  ta.solver.add(train);

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score a dataset and write ROC reports");
  evaluate->add_option("--model", ea.model, "Model file")->required();
  evaluate->add_option("--data", ea.data, "Dataset to score")->required();
  evaluate->add_option("--report", ea.report, "ROC report CSV")->required();
  evaluate->add_option("--groups", ea.groups, "Per-group score CSV");

  CvArgs ca;
  ca.threads = threads;
  auto* cv = app.add_subcommand("cv", "Cross-validate lambda over a grid");
  cv->add_option("--data", ca.data, "Dataset")->required();
  cv->add_option("--out", ca.out, "Result CSV")->required();
  cv->add_option("--algo", ca.algo, "gcm, gcm-nogroup, svm or misvm")->capture_default_str();
  cv->add_option("--folds", ca.folds, "Number of folds (>= 2)")->capture_default_str();
  cv->add_option("--lambda-grid", ca.grid, "Comma-separated lambda values")->delimiter(',');
  cv->add_option("--epsilon", ca.epsilon, "Huber width");
  cv->add_option("--delta", ca.delta, "Hinge smoothing");
  cv->add_option("--seed", ca.seed, "Fold shuffle seed")->capture_default_str();
  cv->add_option("--threads", ca.threads, "Worker threads");
  ca.features.add(cv, false);
  ca.solver.add(cv);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic grouped dataset");
  synth->add_option("--out", sa.out, "Dataset file (.csv for text)")->required();
  synth->add_option("--preset", sa.preset, "fig5-regime or easy")->capture_default_str();
  synth->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  synth->add_option("--n-pos", sa.n_pos, "Positive groups");
  synth->add_option("--n-neg", sa.n_neg, "Negative groups");
  synth->add_option("--min-candidates", sa.min_candidates, "Smallest group");
  synth->add_option("--max-candidates", sa.max_candidates, "Largest group");
  synth->add_option("--dim", sa.dim, "Feature count");
  synth->add_option("--decoys", sa.decoys, "Near-miss rows per positive group");
  synth->add_option("--key-shift", sa.key_shift, "Mean shift of key rows");
  synth->add_option("--outlier-rate", sa.outlier_rate, "Share of negative groups with an outlier");
  synth->add_option("--format", sa.format, "binary or text")->check(CLI::IsMember({"binary", "text"}));

  CompareArgs pa;
  pa.threads = threads;
  auto* compare = app.add_subcommand("compare", "Train all four algorithms and tabulate test AUCs");
  compare->add_option("--train", pa.train, "Training dataset")->required();
  compare->add_option("--test", pa.test, "Test dataset")->required();
  compare->add_option("--out", pa.out, "Result CSV")->required();
  compare->add_option("--lambda", pa.lambda, "Loss weight for every algorithm")->capture_default_str();
  compare->add_option("--epsilon", pa.epsilon, "Huber width for gcm and gcm-nogroup")->capture_default_str();
  compare->add_option("--delta", pa.delta, "Hinge smoothing for gcm and gcm-nogroup")->capture_default_str();
  compare->add_option("--threads", pa.threads, "Worker threads");
  pa.solver.add(compare);

  std::string manifest;
  CLI::App* run = nullptr;
  if (allow_run) {
    run = app.add_subcommand("run", "Repeat the command recorded in a manifest");
    run->add_option("manifest", manifest, "Manifest JSON")->required();
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (ta.threads < 1 || ca.threads < 1 || pa.threads < 1) return error_exit("--threads must be >= 1", kExitUsage);

  if (*train) return run_train(ta, args);
  if (*evaluate) return run_evaluate(ea, args);
  if (*cv) return run_cv(ca, args);
  if (*synth) return run_synth(sa, args);
  if (*compare) return run_compare(pa, args);
  if (run && *run) return run_manifest(manifest);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args, true);
  } catch (const gcm::DataError& e) {
    return error_exit(std::string(gcm::to_string(e.kind())) + ": " + e.what(), kExitData);
  } catch (const gcm::Error& e) {
    switch (e.category()) {
      case gcm::ErrorCategory::kUsage: return error_exit(e.what(), kExitUsage);
      case gcm::ErrorCategory::kData: return error_exit(e.what(), kExitData);
      case gcm::ErrorCategory::kNumerical: return error_exit(e.what(), kExitNumerical);
    }
  } catch (const fs::filesystem_error& e) {
    return error_exit(e.what(), kExitData);
  } catch (const std::exception& e) {
    return error_exit(e.what(), kExitNumerical);
  }
  return kExitNumerical;
}
