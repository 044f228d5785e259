#include "prepost/trial_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "prepost/summation.hpp"

namespace prepost {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void row_error(std::size_t row, const std::string& what) {
  throw DataError("row " + std::to_string(row) + ": " + what);
}

double parse_value(std::string_view field, std::size_t row, const char* column) {
  if (field.empty()) row_error(row, std::string("missing value in column ") + column);
  // from_chars rejects a leading '+', accept it for hand-edited files.
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    row_error(row, std::string("cannot parse ") + column + " value '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    row_error(row, std::string("non-finite ") + column + " value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

TrialDataset TrialDataset::from_records(std::vector<SubjectRecord> records) {
  std::array<std::size_t, 2> counts{0, 0};
  std::unordered_set<std::string> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t row = i + 1;
    if (r.arm != 0 && r.arm != 1) {
      row_error(row, "arm must be 0 or 1, got " + std::to_string(r.arm));
    }
    if (!std::isfinite(r.y_pre) || !std::isfinite(r.y_post)) {
      row_error(row, "non-finite outcome value");
    }
    if (r.subject_id.empty()) row_error(row, "empty subject_id");
    if (!seen.insert(r.subject_id).second) {
      row_error(row, "duplicate subject_id '" + r.subject_id + "'");
    }
    ++counts[static_cast<std::size_t>(r.arm)];
  }
  for (int arm = 0; arm < 2; ++arm) {
    if (counts[static_cast<std::size_t>(arm)] < 2) {
      throw DataError("arm " + std::to_string(arm) + " has fewer than 2 subjects");
    }
  }
  return TrialDataset(std::move(records), counts);
}

TrialDataset parse_trial_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: expected header subject_id,arm,y_pre,y_post");
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  const auto columns = split_commas(header);
  if (columns.size() != 4 || columns[0] != "subject_id" || columns[1] != "arm" ||
      columns[2] != "y_pre" || columns[3] != "y_post") {
    throw DataError("bad header '" + std::string(trim(header)) +
                    "': expected subject_id,arm,y_pre,y_post");
  }

  std::vector<SubjectRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_commas(line);
    if (fields.size() != 4) {
      row_error(row, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    SubjectRecord rec;
    rec.subject_id = std::string(fields[0]);
    if (rec.subject_id.empty()) row_error(row, "empty subject_id");
    if (fields[1] == "0") {
      rec.arm = 0;
    } else if (fields[1] == "1") {
      rec.arm = 1;
    } else {
      row_error(row, "arm must be 0 or 1, got '" + std::string(fields[1]) + "'");
    }
    rec.y_pre = parse_value(fields[2], row, "y_pre");
    rec.y_post = parse_value(fields[3], row, "y_post");
    records.push_back(std::move(rec));
  }
  return TrialDataset::from_records(std::move(records));
}

TrialDataset read_trial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return parse_trial_csv(in);
}

void write_trial_csv(std::ostream& out, const TrialDataset& ds) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "subject_id,arm,y_pre,y_post\n";
  for (const auto& r : ds.records()) {
    buf << r.subject_id << ',' << r.arm << ',' << r.y_pre << ',' << r.y_post << '\n';
  }
  out << buf.str();
}

double ArmStats::correlation() const {
  if (ss_pre <= 0.0 || ss_post <= 0.0) return 0.0;
  return sp_cross / std::sqrt(ss_pre * ss_post);
}

SufficientStats sufficient_stats(const TrialDataset& ds) {
  SufficientStats st;
  std::array<CompensatedSum, 2> sum_pre, sum_post;
  CompensatedSum total_pre;
  for (const auto& r : ds.records()) {
    const auto j = static_cast<std::size_t>(r.arm);
    sum_pre[j] += r.y_pre;
    sum_post[j] += r.y_post;
    total_pre += r.y_pre;
  }
  const double n_total = static_cast<double>(ds.size());
  for (std::size_t j = 0; j < 2; ++j) {
    auto& a = st.arms[j];
    a.n = ds.arm_size(static_cast<int>(j));
    a.mean_pre = sum_pre[j].value() / static_cast<double>(a.n);
    a.mean_post = sum_post[j].value() / static_cast<double>(a.n);
  }
  st.grand_mean_pre = total_pre.value() / n_total;

  std::array<CompensatedSum, 2> ss_pre, ss_post, sp;
  CompensatedSum ss_total;
  for (const auto& r : ds.records()) {
    const auto j = static_cast<std::size_t>(r.arm);
    const double dx = r.y_pre - st.arms[j].mean_pre;
    const double dy = r.y_post - st.arms[j].mean_post;
    ss_pre[j] += dx * dx;
    ss_post[j] += dy * dy;
    sp[j] += dx * dy;
    const double dg = r.y_pre - st.grand_mean_pre;
    ss_total += dg * dg;
  }
  for (std::size_t j = 0; j < 2; ++j) {
    st.arms[j].ss_pre = ss_pre[j].value();
    st.arms[j].ss_post = ss_post[j].value();
    st.arms[j].sp_cross = sp[j].value();
  }
  st.var_pre = ss_total.value() / (n_total - 1.0);
  st.p0 = static_cast<double>(st.arms[0].n) / n_total;
  st.p1 = static_cast<double>(st.arms[1].n) / n_total;
  return st;
}

std::vector<double> change_scores(const TrialDataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records()) out.push_back(r.y_post - r.y_pre);
  return out;
}

double percent_change(double from, double to) {
  if (from == 0.0) throw DataError("percent change undefined for zero baseline");
  return (to - from) / from;
}

PercentChangeSummary percent_change_summary(const TrialDataset& ds) {
  std::array<CompensatedSum, 2> sums;
  for (const auto& r : ds.records()) {
    if (r.y_pre == 0.0) {
      throw DataError("subject '" + r.subject_id + "' has zero baseline; percent change undefined");
    }
    sums[static_cast<std::size_t>(r.arm)] += percent_change(r.y_pre, r.y_post);
  }
  PercentChangeSummary s;
  s.mean_control = sums[0].value() / static_cast<double>(ds.n0());
  s.mean_treatment = sums[1].value() / static_cast<double>(ds.n1());
  s.tau_star = s.mean_treatment - s.mean_control;
  return s;
}

std::vector<LongRecord> to_long_format(const TrialDataset& ds) {
  std::vector<LongRecord> rows;
  rows.reserve(2 * ds.size());
  for (const auto& r : ds.records()) {
    rows.push_back({r.subject_id, r.arm, 0, r.y_pre});
    rows.push_back({r.subject_id, r.arm, 1, r.y_post});
  }
  return rows;
}

void write_long_csv(std::ostream& out, std::span<const LongRecord> rows) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  buf << "subject_id,arm,time,y\n";
  for (const auto& r : rows) {
    buf << r.subject_id << ',' << r.arm << ',' << r.time << ',' << r.y << '\n';
  }
  out << buf.str();
}

}  // namespace prepost
