#include "cdslab/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "cdslab/config.hpp"
#include "cdslab/error.hpp"
#include "cdslab/report.hpp"
#include "cdslab/validation.hpp"

namespace cdslab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string git_blob_sha1(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

struct Options {
  std::string config;
  std::optional<std::int64_t> paths;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out = ".";
  int levels = 4;
  bool assert_convergence = false;
  bool unsafe_model = false;
  std::int64_t n_max = 1000000;
};

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, const Options& opt) : command_(std::move(command)), opt_(opt), start_(utc_now()) {}

  void set_config(const std::string& bytes, const SimConfig& sim) {
    fingerprint_ = git_blob_sha1(bytes);
    sim_ = sim;
  }
  void add(const fs::path& file) { files_.push_back(file.filename().string()); }

  void write(const fs::path& dir) {
    files_.push_back("manifest.json");
    json j{{"command", command_},
           {"config", opt_.config},
           {"output_dir", opt_.out},
           {"start", start_},
           {"end", utc_now()},
           {"artifacts", files_}};
    if (sim_) {
      j["sim"] = {{"steps", sim_->steps},
                  {"paths", sim_->paths},
                  {"seed", sim_->seed},
                  {"workers", sim_->workers},
                  {"chunk_size", sim_->chunk_size}};
      j["seed"] = sim_->seed;
      j["config_fingerprint"] = fingerprint_;
    }
    std::ofstream(dir / "manifest.json") << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  const Options& opt_;
  std::string start_;
  std::string fingerprint_;
  std::optional<SimConfig> sim_;
  std::vector<std::string> files_;
};

int default_workers() {
  if (const char* env = std::getenv("CDS_WORKERS")) {
    try {
      int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
  }
  return 0;
}

struct Loaded {
  RunConfig cfg;
  std::string bytes;
};

// Returns nullopt after printing diagnostics when the config is unusable.
std::optional<Loaded> load_and_check(const Options& opt, std::ostream& err, bool require_valid = true) {
  Loaded l;
  try {
    l.bytes = read_file(opt.config);
    l.cfg = parse_config(l.bytes);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return std::nullopt;
  }
  SimConfig& sim = l.cfg.sim;
  if (opt.paths) sim.paths = *opt.paths;
  if (opt.steps) sim.steps = *opt.steps;
  if (opt.seed) sim.seed = *opt.seed;
  if (opt.workers) {
    sim.workers = *opt.workers;
  } else if (int w = default_workers(); w > 0) {
    sim.workers = w;
  }
  std::vector<std::string> sim_errors;
  validate_sim(sim, sim_errors);
  ValidationReport rep = validate(l.cfg.model, l.cfg.contract);
  for (const auto& e : sim_errors) err << "config error: " << e << '\n';
  for (const auto& e : rep.errors) err << "config error: " << e << '\n';
  if (!sim_errors.empty() || !rep.errors.empty()) return std::nullopt;
  if (!require_valid) return l;
  if (rep.bounds != Check::Pass) {
    err << "validation failed: coefficient bounds (A1) violated\n";
    return std::nullopt;
  }
  if (rep.nondegenerate != Check::Pass) {
    if (!opt.unsafe_model) {
      err << "validation failed: diffusion is degenerate (A2); pass --unsafe-model to run anyway\n";
      return std::nullopt;
    }
    err << "warning: running a degenerate model (--unsafe-model)\n";
  }
  return l;
}

int cmd_price(const Options& opt, std::ostream& out, std::ostream& err) {
  Manifest manifest("price", opt);
  auto loaded = load_and_check(opt, err);
  if (!loaded) return kExitInvalid;
  const RunConfig& cfg = loaded->cfg;
  manifest.set_config(loaded->bytes, cfg.sim);
  PricingOptions popts;
  popts.allow_degenerate = opt.unsafe_model;
  PriceEstimate est;
  try {
    est = estimate_swap_rate(cfg.model, cfg.contract, cfg.sim, popts);
  } catch (const DegeneratePremiumLeg& e) {
    err << "degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InvalidBatch& e) {
    err << "fault: " << e.what() << '\n';
    return kExitFault;
  }
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  const std::string text = to_json(est).dump(2);
  std::ofstream(dir / "price.json") << text << '\n';
  manifest.add(dir / "price.json");
  const fs::path csv = dir / "price.csv";
  const bool fresh = !fs::exists(csv) || fs::file_size(csv) == 0;
  {
    std::ofstream os(csv, std::ios::app);
    if (fresh) os << kPriceCsvHeader << '\n';
    os << price_csv_row(est) << '\n';
  }
  manifest.add(csv);
  manifest.write(dir);
  out << text << '\n';
  return kExitOk;
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
  Manifest manifest("sweep", opt);
  if (opt.levels < 1) {
    err << "--levels must be >= 1\n";
    return kExitInvalid;
  }
  auto loaded = load_and_check(opt, err);
  if (!loaded) return kExitInvalid;
  const RunConfig& cfg = loaded->cfg;
  manifest.set_config(loaded->bytes, cfg.sim);
  PricingOptions popts;
  popts.allow_degenerate = opt.unsafe_model;
  SweepReport rep;
  try {
    rep = run_sweep(cfg.model, cfg.contract, cfg.sim, halving_levels(cfg.sim.steps, opt.levels), popts);
  } catch (const DegeneratePremiumLeg& e) {
    err << "degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const InvalidBatch& e) {
    err << "fault: " << e.what() << '\n';
    return kExitFault;
  }
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "sweep.csv");
    write_sweep_csv(os, rep);
  }
  manifest.add(dir / "sweep.csv");
  std::ofstream(dir / "sweep.json") << to_json(rep).dump(2) << '\n';
  manifest.add(dir / "sweep.json");
  manifest.write(dir);
  write_sweep_csv(out, rep);
  if (opt.assert_convergence && !rep.delta_decreasing()) {
    err << "convergence check failed: |c(h) - c(h/2)| is not strictly decreasing\n";
    return kExitConvergence;
  }
  return kExitOk;
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  Manifest manifest("validate", opt);
  auto loaded = load_and_check(opt, err, false);
  if (!loaded) return kExitInvalid;
  const RunConfig& cfg = loaded->cfg;
  manifest.set_config(loaded->bytes, cfg.sim);
  ValidationReport rep = validate(cfg.model, cfg.contract);
  json j = to_json(rep);
  json oracle = json::array();
  if (rep.ok()) {
    for (const auto& c : oracle_comparison(cfg.model, cfg.contract, cfg.sim)) oracle.push_back(to_json(c));
  }
  j["oracle"] = oracle;
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  std::ofstream(dir / "validation.json") << j.dump(2) << '\n';
  manifest.add(dir / "validation.json");
  manifest.write(dir);
  out << j.dump(2) << '\n';
  return rep.ok() ? kExitOk : kExitInvalid;
}

int cmd_tangency(const Options& opt, std::ostream& out, std::ostream& err) {
  Manifest manifest("tangency", opt);
  if (opt.n_max < 1) {
    err << "--n-max must be >= 1\n";
    return kExitInvalid;
  }
  TangencyResult t = tangency_demo(opt.n_max);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "tangency.csv");
    write_tangency_csv(os, t);
  }
  manifest.add(dir / "tangency.csv");
  manifest.write(dir);
  write_tangency_csv(out, t);
  if (!t.passed()) {
    err << "tangency assertions failed: " << t.failures << " of " << t.checked << " shifted paths\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_dump(const Options& opt, std::ostream& out, std::ostream& err) {
  Manifest manifest("dump", opt);
  auto loaded = load_and_check(opt, err);
  if (!loaded) return kExitInvalid;
  const RunConfig& cfg = loaded->cfg;
  manifest.set_config(loaded->bytes, cfg.sim);
  const fs::path dir(opt.out);
  fs::create_directories(dir);
  std::ofstream os(dir / "paths.bin", std::ios::binary);
  const std::int64_t n = std::min<std::int64_t>(cfg.sim.paths, opt.paths.value_or(16));
  std::int64_t faults = 0;
  for (std::int64_t p = 0; p < n; ++p) {
    PathGrid path = simulate_path(cfg.model, cfg.contract, cfg.sim, RngSubstream(cfg.sim.seed, static_cast<std::uint64_t>(p)),
                                  opt.unsafe_model);
    if (path.fault) ++faults;
    write_path_dump(os, path);
  }
  os.close();
  manifest.add(dir / "paths.bin");
  manifest.write(dir);
  out << "wrote " << n << " paths (" << faults << " faulted) to " << (dir / "paths.bin").string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Monte Carlo basket CDS pricing and convergence diagnostics"};
  app.require_subcommand(1);

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "JSON configuration file")->required();
    sub->add_option("--paths", opt.paths, "number of Monte Carlo paths");
    sub->add_option("--steps", opt.steps, "Euler steps per maturity (coarsest level for sweep)");
    sub->add_option("--seed", opt.seed, "64-bit RNG seed");
    sub->add_option("--workers", opt.workers, "worker threads (default: $CDS_WORKERS, else config)");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_flag("--unsafe-model", opt.unsafe_model, "allow a singular correlation matrix");
  };

  CLI::App* price = app.add_subcommand("price", "estimate the swap rate");
  add_run_flags(price);
  CLI::App* sweep = app.add_subcommand("sweep", "coupled step-size convergence sweep");
  add_run_flags(sweep);
  sweep->add_option("--levels", opt.levels, "number of step-size levels (halving h)");
  sweep->add_flag("--assert-convergence", opt.assert_convergence, "exit 4 unless |delta c| strictly decreases");
  CLI::App* val = app.add_subcommand("validate", "check model assumptions and the single-name oracle");
  add_run_flags(val);
  CLI::App* tangency = app.add_subcommand("tangency", "hitting-time tangency counterexample");
  tangency->add_option("--n-max", opt.n_max, "largest shift index n (shift 1/n)");
  tangency->add_option("--out", opt.out, "output directory");
  CLI::App* dump = app.add_subcommand("dump", "write simulated paths in the binary dump format");
  add_run_flags(dump);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (*price) return cmd_price(opt, out, err);
    if (*sweep) return cmd_sweep(opt, out, err);
    if (*val) return cmd_validate(opt, out, err);
    if (*tangency) return cmd_tangency(opt, out, err);
    if (*dump) return cmd_dump(opt, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace cdslab
