#include "prepost/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <system_error>

namespace prepost {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw DataError("expected a number, got " + j.dump());
}

namespace {

Json optional_number(const std::optional<double>& x) { return x ? json_number(*x) : Json(nullptr); }

std::optional<double> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return number_from_json(j.at(key));
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number_at(const Json& j, const char* key) { return number_from_json(require(j, key)); }

Json cov_json(const Cov2x2& c) { return Json::array({json_number(c.v00), json_number(c.v01), json_number(c.v11)}); }

Cov2x2 cov_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("covariance must be [v00, v01, v11]");
  return {number_from_json(j[0]), number_from_json(j[1]), number_from_json(j[2])};
}

Json arm_residuals_json(const ArmResiduals& r) {
  Json a0 = Json::array();
  Json a1 = Json::array();
  for (double x : r.arm0) a0.push_back(json_number(x));
  for (double x : r.arm1) a1.push_back(json_number(x));
  return {{"arm0", a0}, {"arm1", a1}};
}

std::optional<ArmResiduals> arm_residuals_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  ArmResiduals r;
  for (const auto& x : require(j.at(key), "arm0")) r.arm0.push_back(number_from_json(x));
  for (const auto& x : require(j.at(key), "arm1")) r.arm1.push_back(number_from_json(x));
  return r;
}

Json summary_json(const DatasetSummary& s) {
  Json arms = Json::array();
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& a = s.arms[j];
    arms.push_back({{"arm", j},
                    {"n", a.n},
                    {"mean_pre", json_number(a.mean_pre)},
                    {"mean_post", json_number(a.mean_post)},
                    {"sd_pre", json_number(a.sd_pre)},
                    {"sd_post", json_number(a.sd_post)},
                    {"correlation", json_number(a.correlation)}});
  }
  Json pc = nullptr;
  if (s.percent_change) {
    pc = {{"mean_control", json_number(s.percent_change->mean_control)},
          {"mean_treatment", json_number(s.percent_change->mean_treatment)},
          {"tau_star", json_number(s.percent_change->tau_star)},
          {"descriptive_only", s.percent_change->descriptive_only}};
  }
  return {{"n0", s.arms[0].n},
          {"n1", s.arms[1].n},
          {"grand_mean_pre", json_number(s.grand_mean_pre)},
          {"arms", arms},
          {"percent_change", pc}};
}

DatasetSummary summary_from(const Json& j) {
  DatasetSummary s;
  const auto& arms = require(j, "arms");
  if (!arms.is_array() || arms.size() != 2) throw DataError("dataset_summary.arms must have two entries");
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& a = arms[k];
    s.arms[k] = {require(a, "n").get<std::size_t>(), number_at(a, "mean_pre"), number_at(a, "mean_post"),
                 number_at(a, "sd_pre"),             number_at(a, "sd_post"),  number_at(a, "correlation")};
  }
  s.grand_mean_pre = number_at(j, "grand_mean_pre");
  if (j.contains("percent_change") && !j.at("percent_change").is_null()) {
    const auto& pc = j.at("percent_change");
    s.percent_change = PercentChangeSummary{number_at(pc, "mean_control"), number_at(pc, "mean_treatment"),
                                            number_at(pc, "tau_star"), require(pc, "descriptive_only").get<bool>()};
  }
  return s;
}

Json row_json(const ReportRow& row) {
  Json j;
  j["method"] = method_name(row.method);
  j["label"] = method_label(row.method);
  if (!row.result) {
    for (const char* k : {"estimate", "se_model", "se_hc", "se_adjusted_hc", "se_bootstrap", "se_used", "df", "t",
                          "p", "ci95", "nuisance", "bootstrap_redraws"}) {
      j[k] = nullptr;
    }
    j["error"] = row.error;
    return j;
  }
  const auto& r = *row.result;
  j["estimate"] = json_number(r.estimate);
  j["se_model"] = json_number(r.se_model);
  j["se_hc"] = optional_number(r.se_hc);
  j["se_adjusted_hc"] = optional_number(r.se_adjusted_hc);
  j["se_bootstrap"] = optional_number(r.se_bootstrap);
  j["se_used"] = se_kind_name(r.se_used);
  j["df"] = json_number(r.df);
  j["t"] = json_number(r.t_stat);
  j["p"] = json_number(r.p_value);
  j["ci95"] = Json::array({json_number(r.ci95[0]), json_number(r.ci95[1])});
  Json nuisance = {{"slope_baseline", optional_number(r.slope_baseline)},
                   {"slope_interaction", optional_number(r.slope_interaction)},
                   {"covariance", nullptr}};
  if (r.covariance) {
    Json arms = Json::array();
    for (const auto& c : r.covariance->arms) arms.push_back(cov_json(c));
    nuisance["covariance"] = {
        {"arms", arms}, {"iterations", r.covariance->iterations}, {"converged", r.covariance->converged}};
  }
  j["nuisance"] = nuisance;
  j["bootstrap_redraws"] = row.bootstrap_redraws ? Json(*row.bootstrap_redraws) : Json(nullptr);
  j["error"] = nullptr;
  return j;
}

MethodId method_from(const Json& j) {
  const auto& name = require(j, "method");
  if (!name.is_string()) throw DataError("method must be a string");
  const auto m = parse_method_name(name.get<std::string>());
  if (!m) throw DataError("unknown method '" + name.get<std::string>() + "'");
  return *m;
}

ReportRow row_from(const Json& j) {
  ReportRow row;
  row.method = method_from(j);
  if (j.contains("error") && j.at("error").is_string()) {
    row.error = j.at("error").get<std::string>();
    return row;
  }
  AnalysisResult r;
  r.method = row.method;
  r.estimate = number_at(j, "estimate");
  r.se_model = number_at(j, "se_model");
  r.se_hc = optional_from(j, "se_hc");
  r.se_adjusted_hc = optional_from(j, "se_adjusted_hc");
  r.se_bootstrap = optional_from(j, "se_bootstrap");
  const auto used = parse_se_kind(require(j, "se_used").get<std::string>());
  if (!used) throw DataError("unknown se_used");
  r.se_used = *used;
  r.df = number_at(j, "df");
  r.t_stat = number_at(j, "t");
  r.p_value = number_at(j, "p");
  const auto& ci = require(j, "ci95");
  if (!ci.is_array() || ci.size() != 2) throw DataError("ci95 must have two entries");
  r.ci95 = {number_from_json(ci[0]), number_from_json(ci[1])};
  if (j.contains("nuisance") && j.at("nuisance").is_object()) {
    const auto& nu = j.at("nuisance");
    r.slope_baseline = optional_from(nu, "slope_baseline");
    r.slope_interaction = optional_from(nu, "slope_interaction");
    if (nu.contains("covariance") && !nu.at("covariance").is_null()) {
      const auto& c = nu.at("covariance");
      GlsCovEstimate est;
      for (const auto& a : require(c, "arms")) est.arms.push_back(cov_from(a));
      est.iterations = require(c, "iterations").get<int>();
      est.converged = require(c, "converged").get<bool>();
      r.covariance = std::move(est);
    }
  }
  if (j.contains("bootstrap_redraws") && !j.at("bootstrap_redraws").is_null()) {
    row.bootstrap_redraws = j.at("bootstrap_redraws").get<std::size_t>();
  }
  row.result = std::move(r);
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_optional(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

Json mc_value_json(const McValue& v) { return {{"value", json_number(v.value)}, {"mc_se", json_number(v.mc_se)}}; }

}  // namespace

Json residuals_json(const ComparisonReport& report) {
  Json j = Json::object();
  j["ancova_main"] = report.residuals_main ? arm_residuals_json(*report.residuals_main) : Json(nullptr);
  j["ancova_interaction"] =
      report.residuals_interaction ? arm_residuals_json(*report.residuals_interaction) : Json(nullptr);
  return j;
}

Json to_json(const ComparisonReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) rows.push_back(row_json(r));
  return {{"dataset_summary", summary_json(report.dataset_summary)},
          {"rows", rows},
          {"residuals", residuals_json(report)}};
}

ComparisonReport comparison_report_from_json(const Json& j) {
  try {
    ComparisonReport report;
    report.dataset_summary = summary_from(require(j, "dataset_summary"));
    for (const auto& r : require(j, "rows")) report.rows.push_back(row_from(r));
    if (j.contains("residuals") && j.at("residuals").is_object()) {
      report.residuals_main = arm_residuals_from(j.at("residuals"), "ancova_main");
      report.residuals_interaction = arm_residuals_from(j.at("residuals"), "ancova_interaction");
    }
    return report;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

void write_rows_csv(std::ostream& out, const ComparisonReport& report) {
  out << "method,estimate,se_model,se_hc,se_adjusted_hc,se_bootstrap,df,t,p,ci95,se_used,error\n";
  for (const auto& row : report.rows) {
    out << method_name(row.method);
    if (!row.result) {
      out << ",,,,,,,,,,," << csv_field(row.error) << '\n';
      continue;
    }
    const auto& r = *row.result;
    out << ',' << format_number(r.estimate) << ',' << format_number(r.se_model) << ',' << csv_optional(r.se_hc)
        << ',' << csv_optional(r.se_adjusted_hc) << ',' << csv_optional(r.se_bootstrap) << ','
        << format_number(r.df) << ',' << format_number(r.t_stat) << ',' << format_number(r.p_value) << ','
        << format_number(r.ci95[0]) << ';' << format_number(r.ci95[1]) << ',' << se_kind_name(r.se_used) << ",\n";
  }
}

Json to_json(const MCReport& report) {
  Json methods = Json::array();
  for (const auto& m : report.methods) {
    Json kinds = Json::object();
    for (const auto& k : m.se_kinds) {
      kinds[std::string(se_kind_name(k.kind))] = {{"mean_se", mc_value_json(k.mean_se)},
                                                  {"calibration", mc_value_json(k.calibration)},
                                                  {"coverage", mc_value_json(k.coverage)},
                                                  {"rejection", mc_value_json(k.rejection)}};
    }
    methods.push_back({{"method", method_name(m.method)},
                       {"inference_se", se_kind_name(m.inference_se)},
                       {"successes", m.successes},
                       {"failures", m.failures},
                       {"mean_estimate", mc_value_json(m.mean_estimate)},
                       {"bias", mc_value_json(m.bias)},
                       {"empirical_sd", mc_value_json(m.empirical_sd)},
                       {"oracle_sd", optional_number(m.oracle_sd)},
                       {"coverage", mc_value_json(m.coverage)},
                       {"rejection", mc_value_json(m.rejection)},
                       {"se_kinds", kinds}});
  }
  return {{"scenario", report.scenario},   {"true_tau", json_number(report.true_tau)},
          {"replications", report.replications}, {"seed", report.seed},
          {"alpha", json_number(report.alpha)},  {"methods", methods}};
}

void write_mc_csv(std::ostream& out, const MCReport& report) {
  static constexpr SeKind kinds[] = {SeKind::Model, SeKind::Hc, SeKind::AdjustedHc};
  out << "method,inference_se,successes,failures,mean_estimate,mean_estimate_mcse,bias,bias_mcse,empirical_sd,"
         "empirical_sd_mcse,oracle_sd,coverage,coverage_mcse,rejection,rejection_mcse";
  for (SeKind k : kinds) {
    const auto n = se_kind_name(k);
    for (const char* f : {"mean_se", "calibration", "coverage", "rejection"}) {
      out << ',' << f << '_' << n << ',' << f << '_' << n << "_mcse";
    }
  }
  out << '\n';
  auto pair = [&](const McValue& v) { out << ',' << format_number(v.value) << ',' << format_number(v.mc_se); };
  for (const auto& m : report.methods) {
    out << method_name(m.method) << ',' << se_kind_name(m.inference_se) << ',' << m.successes << ',' << m.failures;
    pair(m.mean_estimate);
    pair(m.bias);
    pair(m.empirical_sd);
    out << ',' << csv_optional(m.oracle_sd);
    pair(m.coverage);
    pair(m.rejection);
    for (SeKind k : kinds) {
      if (const auto* s = m.find(k)) {
        pair(s->mean_se);
        pair(s->calibration);
        pair(s->coverage);
        pair(s->rejection);
      } else {
        out << ",,,,,,,,";
      }
    }
    out << '\n';
  }
}

namespace {

Json params_json(const PopulationParams& p) {
  Json j = {{"mu_pre", json_number(p.mu_pre)},
            {"mu_post_control", json_number(p.mu_post_control)},
            {"mu_post_treatment", json_number(p.mu_post_treatment)},
            {"sigma_pre", json_number(p.sigma_pre)},
            {"tau", json_number(p.tau())}};
  if (const auto* h = std::get_if<HomogeneousStructure>(&p.structure)) {
    j["structure"] = "homogeneous";
    j["sigma_post"] = json_number(h->sigma_post);
    j["rho"] = json_number(h->rho);
  } else {
    const auto& het = std::get<HeterogeneousStructure>(p.structure);
    j["structure"] = "heterogeneous";
    j["sigma_post_control"] = json_number(het.sigma_post_control);
    j["sigma_post_treatment"] = json_number(het.sigma_post_treatment);
    j["rho_control"] = json_number(het.rho_control);
    j["rho_treatment"] = json_number(het.rho_treatment);
  }
  return j;
}

}  // namespace

Json to_json(const TheoryTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", method_name(r.method)},
                    {"label", method_label(r.method)},
                    {"variance", json_number(r.variance)},
                    {"se", json_number(std::sqrt(r.variance))}});
  }
  Json gaps = Json::array();
  for (const auto& g : table.gaps) {
    gaps.push_back({{"larger", method_name(g.larger)}, {"smaller", method_name(g.smaller)}, {"gap", json_number(g.gap)}});
  }
  return {{"label", table.label},
          {"params", params_json(table.params)},
          {"design", {{"n0", table.design.n0}, {"n1", table.design.n1}}},
          {"rows", rows},
          {"gaps", gaps}};
}

void write_theory_csv(std::ostream& out, const TheoryTable& table) {
  out << "method,variance,se\n";
  for (const auto& r : table.rows) {
    out << method_name(r.method) << ',' << format_number(r.variance) << ',' << format_number(std::sqrt(r.variance))
        << '\n';
  }
}

}  // namespace prepost
