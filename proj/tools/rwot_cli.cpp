#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rwot/rwot.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct GenDeleter {
  void operator()(rwot_generator* g) const { rwot_generator_free(g); }
};
struct DistDeleter {
  void operator()(rwot_distribution* d) const { rwot_distribution_free(d); }
};
using GenPtr = std::unique_ptr<rwot_generator, GenDeleter>;
using DistPtr = std::unique_ptr<rwot_distribution, DistDeleter>;

struct Failure {
  int exit_code;
};

void check(rwot_status st) {
  if (st == RWOT_OK) return;
  std::fprintf(stderr, "rwot: %s: %s\n", rwot_status_name(st), rwot_last_error());
  throw Failure{kExitError};
}

GenPtr make_gen(const std::string& kind, double epsilon, const std::string& matrix) {
  rwot_generator* g = nullptr;
  check(rwot_generator_create_from_file(kind.c_str(), epsilon,
                                        matrix.empty() ? nullptr : matrix.c_str(), &g));
  return GenPtr(g);
}

DistPtr load(const std::string& path) {
  if (path.empty()) return DistPtr();
  rwot_distribution* d = nullptr;
  check(rwot_distribution_load(path.c_str(), &d));
  return DistPtr(d);
}

// "a:b" is every power of two from a to b; otherwise a comma list.
std::vector<int> parse_n_grid(const std::string& text) {
  std::vector<int> out;
  const auto colon = text.find(':');
  try {
    if (colon != std::string::npos) {
      const long a = std::stol(text.substr(0, colon));
      const long b = std::stol(text.substr(colon + 1));
      if (a < 1 || b < a) throw std::invalid_argument("range");
      for (long n = a; n <= b; n *= 2) out.push_back(static_cast<int>(n));
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const long n = std::stol(item);
        if (n < 1) throw std::invalid_argument("size");
        out.push_back(static_cast<int>(n));
      }
    }
  } catch (const std::exception&) {
    out.clear();
  }
  if (out.empty()) {
    std::fprintf(stderr, "rwot: bad sample-size grid '%s' (use a:b or a comma list)\n",
                 text.c_str());
    throw Failure{kExitError};
  }
  return out;
}

struct GenOptions {
  std::string kind = "squared-l2";
  double epsilon = 0.0;
  std::string matrix;

  void add(CLI::App* app) {
    app->add_option("--gen", kind, "squared-l2 | neg-entropy | itakura-saito | mahalanobis")
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "domain floor for the entropy-type generators")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--matrix", matrix, "CSV with the Mahalanobis matrix")->check(CLI::ExistingFile);
  }
};

void add_config(CLI::App* app) {
  // Expanded by expand_config before parsing; declared for --help.
  app->add_option("--config", "key=value file; flags on the command line win");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") + 1 - b);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Replaces `--config FILE` by `--key value` for every key not given on the
// command line. Blank lines and lines starting with # or ; are skipped.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.rfind("--config=", 0) == 0;
  });
  if (it == args.end()) return args;
  std::string path;
  auto end = it + 1;
  if (*it == "--config") {
    if (end == args.end()) {
      std::fprintf(stderr, "--config: expected a file name\n");
      throw Failure{kExitError};
    }
    path = *end++;
  } else {
    path = it->substr(9);
  }
  const auto pos = args.erase(it, end) - args.begin();
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "--config: cannot read '%s'\n", path.c_str());
    throw Failure{kExitError};
  }
  std::vector<std::string> extra;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      std::fprintf(stderr, "%s: line %d: expected key=value\n", path.c_str(), no);
      throw Failure{kExitError};
    }
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + (key.rfind("--", 0) == 0 ? key.substr(2) : key);
    if (has_flag(args, flag)) continue;
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.begin() + pos, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed Wasserstein divergences, checks and RWGAN training"};
  app.set_version_flag("--version", std::string(rwot_version()));
  app.require_subcommand(1);

  // divergence
  GenOptions div_gen;
  std::string div_p, div_q, div_plan;
  auto* div = app.add_subcommand("divergence", "RW divergence between two CSV distributions");
  add_config(div);
  div_gen.add(div);
  div->add_option("--p", div_p, "source distribution CSV")->required()->check(CLI::ExistingFile);
  div->add_option("--q", div_q, "target distribution CSV")->required()->check(CLI::ExistingFile);
  div->add_option("--plan", div_plan, "write the optimal plan as i,j,mass");

  // verify
  std::string ver_suite = "all", ver_out = "verify_report.csv";
  int ver_trials = 200;
  double ver_tol = 1.0;
  std::uint64_t ver_seed = 42;
  auto* ver = app.add_subcommand("verify", "run identity and inequality checks");
  add_config(ver);
  ver->add_option("--suite", ver_suite)
      ->check(CLI::IsMember({"decomposition", "domination", "duality", "gradient", "all"}))
      ->capture_default_str();
  ver->add_option("--trials", ver_trials)->check(CLI::PositiveNumber)->capture_default_str();
  ver->add_option("--seed", ver_seed)->capture_default_str();
  ver->add_option("--tol-scale", ver_tol, "multiplies every pass threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ver->add_option("--out", ver_out)->capture_default_str();

  // rates
  GenOptions rate_gen;
  int rate_d = 1, rate_trials = 50;
  std::string rate_n = "32:1024", rate_out = "rates.csv", rate_target;
  std::uint64_t rate_seed = 42;
  auto* rates = app.add_subcommand("rates", "empirical convergence rate of W(P_n, P)");
  add_config(rates);
  rate_gen.add(rates);
  rates->add_option("--d", rate_d, "dimension when no target is given")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rates->add_option("--n", rate_n, "a:b (powers of two) or comma list")->capture_default_str();
  rates->add_option("--trials", rate_trials)->check(CLI::PositiveNumber)->capture_default_str();
  rates->add_option("--seed", rate_seed)->capture_default_str();
  rates->add_option("--target", rate_target, "target distribution CSV")
      ->check(CLI::ExistingFile);
  rates->add_option("--out", rate_out)->capture_default_str();

  // concentration
  GenOptions conc_gen;
  int conc_d = 1, conc_n = 64, conc_trials = 200;
  std::vector<double> conc_eps = {0.005, 0.01, 0.02, 0.05, 0.1};
  std::string conc_out = "tails.csv", conc_target;
  std::uint64_t conc_seed = 42;
  auto* conc = app.add_subcommand("concentration", "tail probabilities P(W >= eps)");
  add_config(conc);
  conc_gen.add(conc);
  conc->add_option("--d", conc_d)->check(CLI::PositiveNumber)->capture_default_str();
  conc->add_option("--n", conc_n)->check(CLI::PositiveNumber)->capture_default_str();
  conc->add_option("--eps", conc_eps, "comma list of thresholds")
      ->delimiter(',')
      ->capture_default_str();
  conc->add_option("--trials", conc_trials)->check(CLI::PositiveNumber)->capture_default_str();
  conc->add_option("--seed", conc_seed)->capture_default_str();
  conc->add_option("--target", conc_target)->check(CLI::ExistingFile);
  conc->add_option("--out", conc_out)->capture_default_str();

  // gan-train
  rwot_gan_config gcfg;
  rwot_gan_config_default(&gcfg);
  std::string gan_dataset = gcfg.dataset, gan_kind = gcfg.generator_kind, gan_clip = "asym";
  std::string gan_out = "metrics.csv", gan_samples = "samples.csv";
  auto* gan = app.add_subcommand("gan-train", "train the RWGAN on a 2-D mixture");
  add_config(gan);
  gan->add_option("--dataset", gan_dataset)
      ->check(CLI::IsMember({"ring8", "grid25", "single-gaussian"}))
      ->capture_default_str();
  gan->add_option("--generator-kind", gan_kind)->capture_default_str();
  gan->add_option("--clip", gan_clip)->check(CLI::IsMember({"asym", "sym"}))->capture_default_str();
  gan->add_option("--alpha", gcfg.alpha)->capture_default_str();
  gan->add_option("--c", gcfg.c)->capture_default_str();
  gan->add_option("--S", gcfg.s)->capture_default_str();
  gan->add_option("--m", gcfg.m)->capture_default_str();
  gan->add_option("--n-critic", gcfg.n_critic)->capture_default_str();
  gan->add_option("--n-max", gcfg.n_max)->capture_default_str();
  gan->add_option("--seed", gcfg.seed)->capture_default_str();
  gan->add_option("--out", gan_out)->capture_default_str();
  gan->add_option("--samples", gan_samples)->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Failure& f) {
    return f.exit_code;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*div) {
      const GenPtr g = make_gen(div_gen.kind, div_gen.epsilon, div_gen.matrix);
      const DistPtr p = load(div_p), q = load(div_q);
      double value = 0.0;
      check(rwot_rw_divergence(g.get(), p.get(), q.get(),
                               div_plan.empty() ? nullptr : div_plan.c_str(), &value, nullptr));
      std::printf("%.17g\n", value);
    } else if (*ver) {
      int passed = 0, failed = 0;
      check(rwot_verify(ver_suite.c_str(), ver_trials, ver_seed, ver_tol, ver_out.c_str(),
                        &passed, &failed));
      std::fprintf(stderr, "%d passed, %d failed\n", passed, failed);
      return failed == 0 ? kExitOk : kExitCheckFailed;
    } else if (*rates) {
      const GenPtr g = make_gen(rate_gen.kind, rate_gen.epsilon, rate_gen.matrix);
      const DistPtr target = load(rate_target);
      const std::vector<int> grid = parse_n_grid(rate_n);
      double slope = 0.0;
      check(rwot_rates(g.get(), target.get(), rate_d, grid.data(), static_cast<int>(grid.size()),
                       rate_trials, rate_seed, rate_out.c_str(), &slope));
      std::printf("%.17g\n", slope);
    } else if (*conc) {
      const GenPtr g = make_gen(conc_gen.kind, conc_gen.epsilon, conc_gen.matrix);
      const DistPtr target = load(conc_target);
      std::vector<double> probs(conc_eps.size());
      check(rwot_concentration(g.get(), target.get(), conc_d, conc_n, conc_eps.data(),
                               static_cast<int>(conc_eps.size()), conc_trials, conc_seed,
                               conc_out.c_str(), probs.data()));
    } else if (*gan) {
      gcfg.dataset = gan_dataset.c_str();
      gcfg.generator_kind = gan_kind.c_str();
      gcfg.symmetric_clip = gan_clip == "sym";
      double coverage = 0.0;
      check(rwot_gan_train(&gcfg, gan_out.c_str(), gan_samples.c_str(), &coverage));
      std::printf("%.17g\n", coverage);
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitOk;
}
