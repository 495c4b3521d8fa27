#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qtrbm/baselines.hpp"
#include "qtrbm/checkpoint.hpp"
#include "qtrbm/data_io.hpp"
#include "qtrbm/errors.hpp"
#include "qtrbm/eval.hpp"
#include "qtrbm/grad.hpp"
#include "qtrbm/oracle.hpp"
#include "qtrbm/parallel.hpp"
#include "qtrbm/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qtrbm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(const char* fmt, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("--" + flag + ": cannot parse '" + item + "' as a number");
    out.push_back(x);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw DataError("input file not found: '" + path + "'");
}

// Registers options on a subcommand and remembers how to echo each resolved
// value into the run manifest under its flag name.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& help)
      : app_(parent.add_subcommand(name, help)), name_(name) {
    app_->add_option("--config", config_, "JSON file whose keys mirror flag names; flags override it");
    add("seed", seed_, "master seed")->required();
    app_->add_option("--threads", threads_, "worker threads; results do not depend on it")->capture_default_str();
  }

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    manifest_.push_back([name, &var](json& j) { j[name] = var; });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* add_flag(const std::string& name, bool& var, const std::string& help) {
    manifest_.push_back([name, &var](json& j) { j[name] = var; });
    return app_->add_flag("--" + name, var, help);
  }

  // Comma-separated numbers, echoed as a JSON array.
  CLI::Option* add_list(const std::string& name, std::string& var, const std::string& help) {
    manifest_.push_back([name, &var](json& j) { j[name] = parse_list(var, name); });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  json manifest() const {
    json j = json::object();
    j["command"] = name_;
    for (const auto& f : manifest_) f(j);
    return j;
  }

  void write_manifest(const fs::path& dir) const { write_text(dir / "manifest.json", manifest().dump(2) + "\n"); }

  CLI::App* app() const { return app_; }
  std::uint64_t seed() const { return seed_; }
  int threads() const { return threads_; }

 private:
  CLI::App* app_;
  std::string name_;
  std::string config_;
  std::uint64_t seed_ = 0;
  int threads_ = default_thread_count();
  std::vector<std::function<void(json&)>> manifest_;
};

// Turns a JSON config into "--key value" tokens placed ahead of the real
// arguments, so later command-line flags take precedence.
std::vector<std::string> config_tokens(const std::string& path, const std::string& command) {
  require_file(path);
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw DataError("config '" + path + "' must be a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") {
      if (value != command) throw UsageError("config '" + path + "' was written for command '" +
                                             value.get<std::string>() + "', not '" + command + "'");
      continue;
    }
    if (key == "config") throw UsageError("config '" + path + "' may not name another config");
    if (value.is_boolean()) {
      tokens.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
      continue;
    }
    tokens.push_back("--" + key);
    if (value.is_string()) {
      tokens.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += item.dump();
      }
      tokens.push_back(joined);
    } else if (value.is_number()) {
      tokens.push_back(value.dump());
    } else {
      throw UsageError("config key '" + key + "' has an unsupported value");
    }
  }
  return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::string config;
  for (std::size_t k = 2; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) config = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) config = args[k].substr(9);
  }
  if (config.empty()) return args;
  std::vector<std::string> out = {args[0], args[1]};
  for (auto& t : config_tokens(config, args[1])) out.push_back(std::move(t));
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

std::string dataset_label(const std::string& path) { return fs::path(path).stem().string(); }

BinaryDataset load_named(const std::string& path) {
  BinaryDataset d = load_dataset(path);
  d.name = dataset_label(path);
  return d;
}

std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,valid_nce,temperature\n";
  for (const auto& e : h.epochs) {
    out += std::to_string(e.epoch) + "," + format_double("%.17g", e.train_loss) + "," +
           format_double("%.17g", e.valid_nce) + "," + format_double("%.17g", e.temperature) + "\n";
  }
  return out;
}

std::string report_line(const EvalReport& r) {
  return "backend=" + r.backend + " dataset=" + r.dataset + " seed=" + std::to_string(r.query_seed) +
         " nce=" + format_double("%.6f", r.nce);
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string train, valid, out, lr = "0.01", queries = "bernoulli:0.5";
  TrainConfig config;
  CLI::Option* patience_opt = nullptr;
};

void setup_train(Command& c, TrainArgs& a) {
  c.add("train", a.train, "training CSV")->required();
  c.add("valid", a.valid, "validation CSV")->required();
  c.add("out", a.out, "output directory")->required();
  c.add("layers", a.config.n_layers, "unrolled message-passing layers");
  c.add("batch-size", a.config.batch_size, "minibatch size");
  c.add_list("lr", a.lr, "learning rate, or a comma list to select on validation NCE");
  c.add("epochs", a.config.max_epochs, "maximum epochs");
  a.patience_opt =
      c.add("patience", a.config.patience, "epochs without improvement before stopping (default: min(10, epochs))");
  c.add("hidden", a.config.hidden_units, "hidden units");
  c.add("clamp", a.config.clamp_l, "logit clamp for hard evidence");
  c.add("init-scale", a.config.init_scale, "initial weight range");
  c.add("adam-beta1", a.config.adam_beta1, "ADAM first-moment decay");
  c.add("adam-beta2", a.config.adam_beta2, "ADAM second-moment decay");
  c.add("adam-eps", a.config.adam_eps, "ADAM epsilon");
  c.add("queries", a.queries, "training query distribution: bernoulli:P or pl");
}

int run_train(const Command& c, TrainArgs& a) {
  require_file(a.train);
  require_file(a.valid);
  const QueryDistribution dist = QueryDistribution::parse(a.queries);
  const std::vector<double> rates = parse_list(a.lr, "lr");
  if (rates.empty()) throw UsageError("--lr needs at least one value");
  a.config.seed = c.seed();
  a.config.threads = c.threads();
  a.config.learning_rate = rates.front();
  if (a.patience_opt->count() == 0) a.config.patience = std::min(a.config.patience, a.config.max_epochs);
  a.config.validate();
  const BinaryDataset train = load_named(a.train);
  const BinaryDataset valid = load_named(a.valid);
  ensure_dir(a.out);

  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  if (rates.size() > 1) {
    LearningRateSearch search = select_learning_rate(train, valid, a.config, dist, rates);
    for (std::size_t k = 0; k < rates.size(); ++k)
      std::cerr << "lr " << rates[k] << " valid_nce " << format_double("%.6f", search.valid_nce[k]) << "\n";
    std::cerr << "selected lr " << search.learning_rate << "\n";
    result = std::move(search.best);
  } else {
    result = train_qt(train, valid, a.config, dist);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_checkpoint(fs::path(a.out) / "checkpoint.json", result.params);
  write_text(fs::path(a.out) / "history.csv", history_csv(result.history));
  c.write_manifest(a.out);
  std::cout << "best_epoch=" << result.history.best_epoch
            << " valid_nce=" << format_double("%.6f", result.history.best_valid_nce)
            << " temperature=" << format_double("%.6f", result.params.temperature()) << "\n";
  std::cerr << "wall_seconds " << format_double("%.2f", seconds) << "\n";
  return kExitOk;
}

// ---- pcd-train -------------------------------------------------------------

struct PcdArgs {
  std::string train, valid, out, lr = "0.01", valid_queries = "bernoulli:0.5";
  PcdConfig config;
};

void setup_pcd(Command& c, PcdArgs& a) {
  c.add("train", a.train, "training CSV")->required();
  c.add("valid", a.valid, "validation CSV")->required();
  c.add("out", a.out, "output directory")->required();
  c.add("epochs", a.config.epochs, "epochs");
  c.add_list("lr", a.lr, "learning rate, or a comma list to select on validation NCE");
  c.add("chains", a.config.n_chains, "persistent chains, 0 means batch size");
  c.add("gibbs-steps", a.config.gibbs_steps_per_update, "Gibbs sweeps per update");
  c.add("batch-size", a.config.batch_size, "minibatch size");
  c.add("hidden", a.config.hidden_units, "hidden units");
  c.add("init-scale", a.config.init_scale, "initial weight range");
  c.add("valid-queries", a.valid_queries, "validation query distribution");
  c.add("valid-gibbs-samples", a.config.valid_gibbs_samples, "Gibbs samples per validation query");
  c.add("valid-gibbs-burn-in", a.config.valid_gibbs_burn_in, "Gibbs burn-in per validation query");
}

int run_pcd(const Command& c, PcdArgs& a) {
  require_file(a.train);
  require_file(a.valid);
  a.config.learning_rates = parse_list(a.lr, "lr");
  a.config.valid_queries = QueryDistribution::parse(a.valid_queries);
  a.config.seed = c.seed();
  a.config.threads = c.threads();
  a.config.validate();
  const BinaryDataset train = load_named(a.train);
  const BinaryDataset valid = load_named(a.valid);
  ensure_dir(a.out);

  const PcdResult result = pcd_train(train, valid, a.config);
  save_checkpoint(fs::path(a.out) / "checkpoint.json", result.params);
  std::string history = "learning_rate,valid_nce\n";
  for (std::size_t k = 0; k < result.valid_nce.size(); ++k) {
    history += format_double("%.17g", a.config.learning_rates[k]) + "," + format_double("%.17g", result.valid_nce[k]) +
               "\n";
  }
  write_text(fs::path(a.out) / "history.csv", history);
  c.write_manifest(a.out);
  std::cout << "learning_rate=" << result.learning_rate << "\n";
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, test, backend = "qtnn", queries = "bernoulli:0.5", out;
  std::uint64_t query_seed = 0;
  std::uint64_t gibbs_seed = 0;
  int layers = kBpBaselineLayers;
  double clamp = kDefaultClamp;
  int gibbs_samples = 1000;
  int gibbs_burn_in = 100;
  CLI::Option* query_seed_opt = nullptr;
  CLI::Option* gibbs_seed_opt = nullptr;
};

void setup_eval(Command& c, EvalArgs& a) {
  c.add("checkpoint", a.checkpoint, "model checkpoint")->required();
  c.add("test", a.test, "test CSV")->required();
  c.add("backend", a.backend, "qtnn, pcd-bp, pcd-gibbs or oracle")
      ->check(CLI::IsMember({"qtnn", "pcd-bp", "pcd-gibbs", "oracle"}));
  a.query_seed_opt = c.add("query-seed", a.query_seed, "seed of the test query set (default: --seed)");
  c.add("queries", a.queries, "test query distribution: bernoulli:P or pl");
  c.add("layers", a.layers, "network depth for qtnn");
  c.add("clamp", a.clamp, "logit clamp for hard evidence");
  c.add("gibbs-samples", a.gibbs_samples, "retained sweeps per query for pcd-gibbs");
  c.add("gibbs-burn-in", a.gibbs_burn_in, "burn-in sweeps per query for pcd-gibbs");
  a.gibbs_seed_opt = c.add("gibbs-seed", a.gibbs_seed, "sampler seed for pcd-gibbs (default: --seed)");
  c.add("out", a.out, "optional output directory for report.csv and manifest.json");
}

std::unique_ptr<InferenceBackend> make_backend(const EvalArgs& a, const Checkpoint& ckpt) {
  if (a.backend == "qtnn") return std::make_unique<QtnnBackend>(as_qt(ckpt), a.layers, a.clamp);
  if (a.backend == "pcd-bp") return std::make_unique<QtnnBackend>(pcd_to_bp_backend(as_std(ckpt), a.clamp));
  if (a.backend == "pcd-gibbs")
    return std::make_unique<GibbsBackend>(as_std(ckpt), a.gibbs_samples, a.gibbs_burn_in, a.gibbs_seed);
  return std::make_unique<OracleBackend>(as_qt(ckpt));
}

int run_eval(const Command& c, EvalArgs& a) {
  require_file(a.checkpoint);
  require_file(a.test);
  if (a.query_seed_opt->count() == 0) a.query_seed = c.seed();
  if (a.gibbs_seed_opt->count() == 0) a.gibbs_seed = c.seed();
  const QueryDistribution dist = QueryDistribution::parse(a.queries);
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const BinaryDataset test = load_named(a.test);
  if (a.backend == "oracle") check_enumeration_size(as_qt(ckpt));
  const auto backend = make_backend(a, ckpt);
  const auto queries = generate_query_set(test.size(), static_cast<std::size_t>(test.visible()), dist, a.query_seed);
  EvalReport report = nce(*backend, test, queries, a.query_seed, c.threads());
  report.dataset = test.name;
  if (!a.out.empty()) {
    ensure_dir(a.out);
    std::ostringstream csv;
    write_report_csv(csv, {report});
    write_text(fs::path(a.out) / "report.csv", csv.str());
    c.write_manifest(a.out);
  }
  std::cout << report_line(report) << "\n";
  return kExitOk;
}

// ---- oracle ----------------------------------------------------------------

struct OracleArgs {
  std::string checkpoint, test, queries = "bernoulli:0.5", out;
  std::uint64_t query_seed = 0;
  CLI::Option* query_seed_opt = nullptr;
};

void setup_oracle(Command& c, OracleArgs& a) {
  c.add("checkpoint", a.checkpoint, "model checkpoint")->required();
  c.add("test", a.test, "optional test CSV; reports the exact NCE floor");
  a.query_seed_opt = c.add("query-seed", a.query_seed, "seed of the test query set (default: --seed)");
  c.add("queries", a.queries, "test query distribution: bernoulli:P or pl");
  c.add("out", a.out, "optional output directory");
}

int run_oracle(const Command& c, OracleArgs& a) {
  require_file(a.checkpoint);
  if (!a.test.empty()) require_file(a.test);
  if (a.query_seed_opt->count() == 0) a.query_seed = c.seed();
  const RbmParamsQT params = as_qt(load_checkpoint(a.checkpoint));
  check_enumeration_size(params);
  const JointTable joint = enumerate_joint(params);
  std::cout << "log_partition=" << format_double("%.12f", joint.log_partition()) << "\n";
  const Vec marg = joint.visible_marginals();
  std::cout << "visible_marginals=";
  for (Eigen::Index j = 0; j < marg.size(); ++j) std::cout << (j ? "," : "") << format_double("%.6f", marg[j]);
  std::cout << "\n";
  if (a.test.empty()) return kExitOk;

  const BinaryDataset test = load_named(a.test);
  const auto queries = generate_query_set(test.size(), static_cast<std::size_t>(test.visible()),
                                          QueryDistribution::parse(a.queries), a.query_seed);
  EvalReport report = nce(OracleBackend(params), test, queries, a.query_seed, c.threads());
  report.dataset = test.name;
  if (!a.out.empty()) {
    ensure_dir(a.out);
    std::ostringstream csv;
    write_report_csv(csv, {report});
    write_text(fs::path(a.out) / "report.csv", csv.str());
    c.write_manifest(a.out);
  }
  std::cout << report_line(report) << "\n";
  return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

struct GradArgs {
  std::string checkpoint, temperatures = "0.5,1,2";
  int instances = 10;
  int visible = 6;
  int hidden = 3;
  int layers = 3;
  double scale = 1.0;
  double step = 1e-4;
  double tol = 1e-4;
};

void setup_gradcheck(Command& c, GradArgs& a) {
  c.add("checkpoint", a.checkpoint, "optional model; random models are drawn otherwise");
  c.add("instances", a.instances, "random (model, sample, query) instances per temperature");
  c.add("visible", a.visible, "visible units of random models");
  c.add("hidden", a.hidden, "hidden units of random models");
  c.add("layers", a.layers, "network depth");
  c.add("scale", a.scale, "parameter range of random models");
  c.add_list("temperatures", a.temperatures, "temperatures to check");
  c.add("step", a.step, "central-difference step");
  c.add("tol", a.tol, "relative error tolerance");
}

int run_gradcheck(const Command& c, GradArgs& a) {
  if (!a.checkpoint.empty()) require_file(a.checkpoint);
  const std::vector<double> temps = parse_list(a.temperatures, "temperatures");
  if (a.instances < 1 || a.visible < 1 || a.hidden < 1) throw UsageError("gradcheck sizes must be positive");
  std::optional<RbmParamsQT> fixed;
  if (!a.checkpoint.empty()) fixed = as_qt(load_checkpoint(a.checkpoint));

  double worst = 0.0;
  std::size_t skipped = 0;
  for (std::size_t ti = 0; ti < temps.size(); ++ti) {
    if (!(temps[ti] > 0.0)) throw UsageError("--temperatures must be positive");
    double worst_t = 0.0;
    for (int k = 0; k < a.instances; ++k) {
      Rng rng = make_stream({c.seed(), tag(StreamTag::kGradCheck), ti, static_cast<std::uint64_t>(k)});
      RbmParamsQT p;
      if (fixed) {
        p = *fixed;
      } else {
        p = RbmParamsQT::zeros(a.visible, a.hidden);
        for (Eigen::Index i = 0; i < p.hidden(); ++i)
          for (Eigen::Index j = 0; j < p.visible(); ++j) p.w(i, j) = uniform_range(rng, -a.scale, a.scale);
        for (Eigen::Index j = 0; j < p.visible(); ++j) p.c_v[j] = uniform_range(rng, -a.scale, a.scale);
        for (Eigen::Index i = 0; i < p.hidden(); ++i) p.c_h[i] = uniform_range(rng, -a.scale, a.scale);
      }
      p.log_t = std::log(temps[ti]);
      Vec v(p.visible());
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = bernoulli(rng, 0.5) ? 1.0 : 0.0;
      const QueryMask q = sample_query(static_cast<std::size_t>(v.size()), QueryDistribution::bernoulli(0.5), rng);
      const GradCheckReport r = finite_diff_check(p, v, q, a.layers, a.step, a.tol);
      worst_t = std::max(worst_t, r.max_rel_error);
      skipped += r.skipped;
    }
    std::cout << "temperature=" << temps[ti] << " max_rel_error=" << format_double("%.3e", worst_t) << "\n";
    worst = std::max(worst, worst_t);
  }
  const bool pass = worst < a.tol;
  std::cout << "max_rel_error=" << format_double("%.3e", worst) << " tolerance=" << format_double("%.0e", a.tol)
            << " skipped=" << skipped << " result=" << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitNumerical;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "rbm", out, split;
  SyntheticOptions options;
};

void setup_synth(Command& c, SynthArgs& a) {
  c.add("kind", a.kind, "rbm or pl-failure")->check(CLI::IsMember({"rbm", "pl-failure"}));
  c.add("out", a.out, "output directory")->required();
  c.add("visible", a.options.visible, "visible units");
  c.add("hidden", a.options.hidden, "hidden units of the ground-truth model");
  c.add("param-scale", a.options.param_scale, "weight range of the ground-truth model");
  c.add("bias-scale", a.options.bias_scale, "bias range of the ground-truth model");
  c.add("samples", a.options.samples, "number of samples");
  c.add_flag("approximate", a.options.allow_approximate, "allow Gibbs sampling above the enumeration cap");
  c.add("burn-in", a.options.gibbs_burn_in, "Gibbs burn-in for approximate sampling");
  c.add("thinning", a.options.gibbs_thinning, "Gibbs thinning for approximate sampling");
  c.add_list("split", a.split, "train,valid,test fractions; writes train/valid/test.csv");
}

int run_synth(const Command& c, SynthArgs& a) {
  a.options.seed = c.seed();
  const fs::path out(a.out);
  BinaryDataset data;
  std::optional<RbmParamsStd> truth;
  if (a.kind == "rbm") {
    SyntheticData s = generate_synthetic(a.options);
    if (!s.exact) std::cerr << "warning: samples are approximate (Gibbs)\n";
    data = std::move(s.data);
    truth = std::move(s.truth);
  } else {
    data = make_pl_failure_dataset(a.options.samples, a.options.seed);
  }
  ensure_dir(out);
  save_dataset(out / "data.csv", data);
  if (truth) save_checkpoint(out / "truth.json", *truth);
  if (!a.split.empty()) {
    const std::vector<double> f = parse_list(a.split, "split");
    if (f.size() != 3) throw UsageError("--split needs three fractions");
    const DatasetSplits parts = split_dataset(data, {f[0], f[1], f[2]}, a.options.seed);
    save_dataset(out / "train.csv", parts.train);
    save_dataset(out / "valid.csv", parts.valid);
    save_dataset(out / "test.csv", parts.test);
  }
  c.write_manifest(out);
  std::cout << "samples=" << data.size() << " visible=" << data.visible() << "\n";
  return kExitOk;
}

int fail(const char* kind, const std::string& message, int code) {
  std::string line = message;
  for (char& ch : line)
    if (ch == '\n' || ch == '\r') ch = ' ';
  std::cerr << "qtrbm: error[" << kind << "]: " << line << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Query-trained RBM inference networks, baselines and exact oracles");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Command train(app, "train", "train an inference network on random queries");
  Command pcd(app, "pcd-train", "train an RBM with persistent contrastive divergence");
  Command eval(app, "eval", "score a checkpoint by normalized cross-entropy");
  Command oracle(app, "oracle", "exact enumeration for small models");
  Command gradcheck(app, "gradcheck", "compare gradients with central differences");
  Command synth(app, "synth", "generate synthetic binary data");
  TrainArgs train_args;
  PcdArgs pcd_args;
  EvalArgs eval_args;
  OracleArgs oracle_args;
  GradArgs grad_args;
  SynthArgs synth_args;
  setup_train(train, train_args);
  setup_pcd(pcd, pcd_args);
  setup_eval(eval, eval_args);
  setup_oracle(oracle, oracle_args);
  setup_gradcheck(gradcheck, grad_args);
  setup_synth(synth, synth_args);

  try {
    const std::vector<std::string> args = expand_config(std::vector<std::string>(argv, argv + argc));
    std::vector<char*> cargs;
    for (const auto& s : args) cargs.push_back(const_cast<char*>(s.c_str()));
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      return fail("usage", e.what(), kExitUsage);
    }
    if (train.app()->parsed()) return run_train(train, train_args);
    if (pcd.app()->parsed()) return run_pcd(pcd, pcd_args);
    if (eval.app()->parsed()) return run_eval(eval, eval_args);
    if (oracle.app()->parsed()) return run_oracle(oracle, oracle_args);
    if (gradcheck.app()->parsed()) return run_gradcheck(gradcheck, grad_args);
    if (synth.app()->parsed()) return run_synth(synth, synth_args);
    return fail("usage", "no command given", kExitUsage);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), kExitUsage);
  } catch (const DataError& e) {
    return fail("data", e.what(), kExitData);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), kExitNumerical);
  } catch (const SizeLimitError& e) {
    return fail("size-limit", e.what(), kExitUsage);
  } catch (const Error& e) {
    return fail("invalid", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kExitUsage);
  }
}
