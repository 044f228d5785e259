#include "prepost/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "prepost/analysis.hpp"
#include "prepost/report.hpp"
#include "prepost/simulation.hpp"
#include "prepost/variance_theory.hpp"

namespace prepost {

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw OutputError("cannot open output file '" + path + "'");
  file << content;
  if (!file) throw OutputError("failed writing '" + path + "'");
}

std::vector<MethodId> parse_methods(const std::string& list, Population pop) {
  if (list.empty() || list == "all") return methods_for(pop);
  std::vector<MethodId> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    const std::string name = b == std::string::npos ? std::string() : item.substr(b, e - b + 1);
    const auto m = parse_method_name(name);
    if (!m) throw UsageError("unknown method '" + name + "'");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw UsageError("--methods is empty");
  return out;
}

Population population_arg(const std::string& name) {
  const auto p = parse_population(name);
  if (!p) throw UsageError("unknown population '" + name + "'");
  return *p;
}

HcKind hc_arg(const std::string& name) {
  try {
    return parse_hc_kind(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

struct Args {
  std::string input;
  std::string out;
  std::string methods = "all";
  std::string hc = "hc2";
  std::size_t bootstrap = 0;
  std::uint64_t seed = 1;
  std::string preset;
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t reps = 1000;
  double alpha = 0.05;
  std::string format = "json";
  std::string residuals;
  std::string population = "unspecified";
  unsigned threads = 0;

  std::optional<double> mu_pre, sigma_pre, mu_post_control, mu_post_treatment;
  std::optional<double> sigma_post, rho;
  std::optional<double> sigma_post_control, sigma_post_treatment, rho_control, rho_treatment;
};

ScenarioConfig scenario_from(const Args& a) {
  ScenarioConfig cfg;
  try {
    cfg = preset(a.preset);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.n0) cfg.design.n0 = a.n0;
  if (a.n1) cfg.design.n1 = a.n1;
  auto& p = cfg.params;
  if (a.mu_pre) p.mu_pre = *a.mu_pre;
  if (a.sigma_pre) p.sigma_pre = *a.sigma_pre;
  if (a.mu_post_control) p.mu_post_control = *a.mu_post_control;
  if (a.mu_post_treatment) p.mu_post_treatment = *a.mu_post_treatment;
  const bool hom_flags = a.sigma_post || a.rho;
  const bool het_flags = a.sigma_post_control || a.sigma_post_treatment || a.rho_control || a.rho_treatment;
  if (auto* h = std::get_if<HomogeneousStructure>(&p.structure)) {
    if (het_flags) throw UsageError("arm-specific SD/correlation flags need a heterogeneous preset");
    if (a.sigma_post) h->sigma_post = *a.sigma_post;
    if (a.rho) h->rho = *a.rho;
  } else {
    if (hom_flags) throw UsageError("--sigma-post/--rho need a homogeneous preset");
    auto& het = std::get<HeterogeneousStructure>(p.structure);
    if (a.sigma_post_control) het.sigma_post_control = *a.sigma_post_control;
    if (a.sigma_post_treatment) het.sigma_post_treatment = *a.sigma_post_treatment;
    if (a.rho_control) het.rho_control = *a.rho_control;
    if (a.rho_treatment) het.rho_treatment = *a.rho_treatment;
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void run_analyze(const Args& a, std::ostream& out) {
  const Population pop = population_arg(a.population);
  AnalyzeOptions opts;
  opts.fit.hc = hc_arg(a.hc);
  opts.fit.population = pop;
  opts.methods = parse_methods(a.methods, pop);
  if (a.bootstrap) {
    if (a.bootstrap < 100) throw UsageError("--bootstrap needs at least 100 replicates");
    opts.bootstrap_replicates = a.bootstrap;
    opts.bootstrap_seed = a.seed;
  }
  opts.threads = a.threads;
  const auto ds = read_trial_csv(a.input);
  const auto report = analyze_all(ds, opts);
  if (!a.residuals.empty()) emit(a.residuals, json_text(residuals_json(report)), out);
  if (a.format == "csv") {
    std::ostringstream buf;
    write_rows_csv(buf, report);
    emit(a.out, buf.str(), out);
  } else {
    emit(a.out, json_text(to_json(report)), out);
  }
}

void run_simulate(const Args& a, std::ostream& out) {
  const auto cfg = scenario_from(a);
  std::ostringstream buf;
  write_trial_csv(buf, generate_trial(cfg, a.seed));
  emit(a.out, buf.str(), out);
}

void run_monte_carlo(const Args& a, std::ostream& out) {
  MCConfig cfg;
  cfg.scenario = scenario_from(a);
  cfg.methods = parse_methods(a.methods, cfg.scenario.population());
  cfg.replications = a.reps;
  cfg.seed = a.seed;
  cfg.alpha = a.alpha;
  cfg.fit.hc = hc_arg(a.hc);
  cfg.threads = a.threads;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto report = run_mc(cfg);
  if (a.format == "csv") {
    std::ostringstream buf;
    write_mc_csv(buf, report);
    emit(a.out, buf.str(), out);
  } else {
    emit(a.out, json_text(to_json(report)), out);
  }
}

void run_compare(const Args& a, std::ostream& out) {
  const auto cfg = scenario_from(a);
  const auto table = theory_table(cfg.params, cfg.design, cfg.label);
  if (a.format == "csv") {
    std::ostringstream buf;
    write_theory_csv(buf, table);
    emit(a.out, buf.str(), out);
  } else {
    emit(a.out, json_text(to_json(table)), out);
  }
}

void add_output(CLI::App* cmd, Args& a) {
  cmd->add_option("--out", a.out, "Output path (default stdout)");
  cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_scenario(CLI::App* cmd, Args& a) {
  cmd->add_option("--preset", a.preset,
                  "homogeneous, het-balanced, het-unbalanced, null-homogeneous or null-het-unbalanced")
      ->required();
  cmd->add_option("--n0", a.n0, "Control arm size")->check(CLI::PositiveNumber);
  cmd->add_option("--n1", a.n1, "Treatment arm size")->check(CLI::PositiveNumber);
  cmd->add_option("--mu-pre", a.mu_pre, "Baseline mean");
  cmd->add_option("--sigma-pre", a.sigma_pre, "Baseline SD");
  cmd->add_option("--mu-post-control", a.mu_post_control, "Control follow-up mean");
  cmd->add_option("--mu-post-treatment", a.mu_post_treatment, "Treatment follow-up mean");
  cmd->add_option("--sigma-post", a.sigma_post, "Follow-up SD (homogeneous)");
  cmd->add_option("--rho", a.rho, "Pre-post correlation (homogeneous)");
  cmd->add_option("--sigma-post-control", a.sigma_post_control, "Control follow-up SD (heterogeneous)");
  cmd->add_option("--sigma-post-treatment", a.sigma_post_treatment, "Treatment follow-up SD (heterogeneous)");
  cmd->add_option("--rho-control", a.rho_control, "Control correlation (heterogeneous)");
  cmd->add_option("--rho-treatment", a.rho_treatment, "Treatment correlation (heterogeneous)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Args a;
  CLI::App app{"Treatment-effect analysis for two-arm randomized pre-post trials", "prepost"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "Fit every method to a trial CSV");
  analyze->add_option("--input", a.input, "CSV with columns subject_id,arm,y_pre,y_post")->required();
  analyze->add_option("--methods", a.methods, "Comma-separated method names or 'all'");
  analyze->add_option("--hc", a.hc, "Sandwich flavour")->check(CLI::IsMember({"hc0", "hc1", "hc2", "hc3"}));
  analyze->add_option("--bootstrap", a.bootstrap, "Bootstrap replicates (0 = none)");
  analyze->add_option("--seed", a.seed, "Bootstrap seed");
  analyze->add_option("--residuals", a.residuals, "Write per-arm ANCOVA residuals as JSON");
  analyze->add_option("--population", a.population, "Assumed covariance structure")
      ->check(CLI::IsMember({"unspecified", "homogeneous", "heterogeneous"}));
  analyze->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  add_output(analyze, a);

  auto* simulate = app.add_subcommand("simulate", "Draw one synthetic trial");
  add_scenario(simulate, a);
  simulate->add_option("--seed", a.seed, "Random seed");
  simulate->add_option("--out", a.out, "Output path (default stdout)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo evaluation of the methods");
  add_scenario(mc, a);
  mc->add_option("--methods", a.methods, "Comma-separated method names or 'all'");
  mc->add_option("--reps", a.reps, "Replications");
  mc->add_option("--seed", a.seed, "Random seed");
  mc->add_option("--alpha", a.alpha, "Test level");
  mc->add_option("--hc", a.hc, "Sandwich flavour")->check(CLI::IsMember({"hc0", "hc1", "hc2", "hc3"}));
  mc->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  add_output(mc, a);

  auto* compare = app.add_subcommand("compare", "Theoretical variances and efficiency gaps");
  add_scenario(compare, a);
  add_output(compare, a);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "prepost: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (analyze->parsed()) run_analyze(a, out);
    if (simulate->parsed()) run_simulate(a, out);
    if (mc->parsed()) run_monte_carlo(a, out);
    if (compare->parsed()) run_compare(a, out);
  } catch (const UsageError& e) {
    err << "prepost: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "prepost: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "prepost: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace prepost
