#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "helpers.hpp"
#include "prepost/trial_data.hpp"

using namespace prepost;
using testing::d4;

namespace {

TrialDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trial_csv(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse a four-row file") {
  const auto ds = parse("subject_id,arm,y_pre,y_post\na,0,1,2\nb,0,3,4\nc,1,2,1\nd,1,4,3\n");
  CHECK(ds.n0() == 2);
  CHECK(ds.n1() == 2);
  REQUIRE(ds.size() == 4);
  CHECK(ds.records()[2].subject_id == "c");
  CHECK(ds.records()[2].y_pre == 2.0);
  CHECK(ds.records()[3].y_post == 3.0);
}

TEST_CASE("parser tolerates BOM, CRLF, blank lines and a leading plus") {
  const auto ds = parse("\xEF\xBB\xBFsubject_id,arm,y_pre,y_post\r\na,0,+1.5,2e1\r\n\r\nb,0, 3 ,4\r\nc,1,2,1\nd,1,4,3");
  CHECK(ds.size() == 4);
  CHECK(ds.records()[0].y_pre == 1.5);
  CHECK(ds.records()[0].y_post == 20.0);
  CHECK(ds.records()[1].y_pre == 3.0);
}

TEST_CASE("parser errors name the data row") {
  const std::string header = "subject_id,arm,y_pre,y_post\n";
  CHECK(parse_error(header + "a,0,1,2\nb,0,3,4\nc,2,2,1\nd,1,4,3\n").starts_with("row 3:"));
  CHECK(parse_error(header + "a,0,1,2\nb,1,3,4\nc,1,2,1\n") == "arm 0 has fewer than 2 subjects");
  CHECK(parse_error(header + "a,0,1,2\nb,0,3\n").starts_with("row 2:"));
  CHECK(parse_error(header + "a,0,1,2\nb,0,x,4\n").starts_with("row 2:"));
  CHECK(parse_error(header + "a,0,1,2\nb,0,nan,4\n").starts_with("row 2:"));
  CHECK(parse_error(header + "a,0,1,inf\n").starts_with("row 1:"));
  CHECK(parse_error(header + "a,0,1,2\na,1,1,2\n").starts_with("row 2:"));
  CHECK(parse_error(header + "a,0,1,\n").starts_with("row 1:"));
  CHECK(parse_error(header + "a,1.0,1,2\n").starts_with("row 1:"));
  CHECK(parse_error("id,arm,y_pre,y_post\n").starts_with("bad header"));
  CHECK(parse_error("").starts_with("empty input"));
}

TEST_CASE("from_records validates invariants") {
  CHECK_THROWS_AS(TrialDataset::from_records({{"a", 0, 1, 2}, {"b", 0, 1, 2}, {"c", 1, 1, 2}}), DataError);
  CHECK_THROWS_AS(TrialDataset::from_records({{"a", 0, 1, 2}, {"b", 0, 1, 2}, {"c", 1, 1, 2}, {"d", 3, 1, 2}}),
                  DataError);
  CHECK_THROWS_AS(
      TrialDataset::from_records({{"a", 0, 1, 2}, {"b", 0, NAN, 2}, {"c", 1, 1, 2}, {"d", 1, 1, 2}}), DataError);
}

TEST_CASE("csv write then parse reproduces the dataset exactly") {
  Rng rng(11);
  const auto ds = testing::random_dataset(rng, 7, 9);
  std::ostringstream out;
  write_trial_csv(out, ds);
  const auto back = parse(out.str());
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records()[i].subject_id == ds.records()[i].subject_id);
    CHECK(back.records()[i].arm == ds.records()[i].arm);
    CHECK(back.records()[i].y_pre == ds.records()[i].y_pre);
    CHECK(back.records()[i].y_post == ds.records()[i].y_post);
  }
}

TEST_CASE("sufficient statistics of D4") {
  const auto st = sufficient_stats(d4());
  CHECK(st.arms[0].mean_pre == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.arms[0].mean_post == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(st.arms[1].mean_pre == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(st.arms[1].mean_post == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(st.arms[0].ss_pre == doctest::Approx(2.0));
  CHECK(st.arms[1].ss_pre == doctest::Approx(2.0));
  CHECK(st.arms[0].sp_cross == doctest::Approx(2.0));
  CHECK(st.p0 == 0.5);
  CHECK(st.p1 == 0.5);
  CHECK(st.grand_mean_pre == doctest::Approx(2.5));
  // baselines {1,3,2,4}: SS about 2.5 is 5, divisor N - 1
  CHECK(st.var_pre == doctest::Approx(5.0 / 3.0));
  CHECK(st.baseline_imbalance() == doctest::Approx(1.0));
}

TEST_CASE("constant data has zero sums of squares") {
  const auto ds = testing::make_dataset({{7, 7}, {7, 7}}, {{7, 7}, {7, 7}, {7, 7}});
  const auto st = sufficient_stats(ds);
  for (const auto& a : st.arms) {
    CHECK(a.ss_pre == 0.0);
    CHECK(a.ss_post == 0.0);
    CHECK(a.sp_cross == 0.0);
    CHECK(a.mean_pre == 7.0);
    CHECK(a.mean_post == 7.0);
  }
  CHECK(st.var_pre == 0.0);
}

TEST_CASE("arm proportions for a 60/120 design") {
  Rng rng(3);
  const auto st = sufficient_stats(testing::random_dataset(rng, 60, 120));
  CHECK(st.p0 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(st.p1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(st.p0 + st.p1 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("change scores") {
  CHECK(change_scores(d4()) == std::vector<double>{1, 1, -1, -1});
  const auto same = testing::make_dataset({{1, 1}, {2, 2}}, {{3, 3}, {4, 4}});
  for (double c : change_scores(same)) CHECK(c == 0.0);
  const auto one = testing::make_dataset({{88, 83}, {1, 1}}, {{1, 1}, {1, 1}});
  CHECK(change_scores(one)[0] == -5.0);
}

TEST_CASE("percent change") {
  CHECK(percent_change(170.5, 197.8) == doctest::Approx(0.16011).epsilon(1e-4));
  CHECK(percent_change(197.8, 170.5) == doctest::Approx(-0.13802).epsilon(1e-4));
  CHECK(percent_change(5.0, 5.0) == 0.0);
  // Up 10% then down 10% nets to 99% of the start.
  const double up = 100.0 * (1.0 + 0.10);
  const double down = up * (1.0 - 0.10);
  CHECK(percent_change(100.0, down) == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK_THROWS_AS(percent_change(0.0, 1.0), DataError);
}

TEST_CASE("percent change summary is descriptive and rejects zero baselines") {
  const auto s = percent_change_summary(testing::make_dataset({{100, 110}, {100, 90}}, {{50, 40}, {50, 45}}));
  CHECK(s.mean_control == doctest::Approx(0.0));
  CHECK(s.mean_treatment == doctest::Approx(-0.15));
  CHECK(s.tau_star == doctest::Approx(-0.15));
  CHECK(s.descriptive_only);
  const auto zero = testing::make_dataset({{100, 110}, {0, 90}}, {{50, 40}, {50, 45}});
  try {
    percent_change_summary(zero);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'s2'") != std::string::npos);
  }
}

TEST_CASE("property: per-arm mean change equals difference of arm means") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = testing::random_dataset(rng, 2 + rng.below(30), 2 + rng.below(30));
    const auto st = sufficient_stats(ds);
    const auto ch = change_scores(ds);
    std::array<double, 2> sum{0, 0};
    for (std::size_t i = 0; i < ds.size(); ++i) sum[static_cast<std::size_t>(ds.records()[i].arm)] += ch[i];
    for (std::size_t j = 0; j < 2; ++j) {
      const double mean = sum[j] / static_cast<double>(st.arms[j].n);
      CHECK(std::abs(mean - (st.arms[j].mean_post - st.arms[j].mean_pre)) < 1e-12 * (1.0 + std::abs(mean)) * 10);
    }
  }
}

TEST_CASE("property: percent change is asymmetric") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = 1.0 + 200.0 * rng.uniform();
    const double b = 1.0 + 200.0 * rng.uniform();
    if (a == b) continue;
    // (b - a) / a versus (b - a) / b: equal magnitude only when a == b.
    const double forward = percent_change(a, b);
    const double backward = -percent_change(b, a);
    CHECK(std::abs(forward - backward) > 1e-9 * std::abs(forward));
  }
}

TEST_CASE("property: sufficient statistics ignore record order") {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = testing::random_dataset(rng, 5 + rng.below(20), 5 + rng.below(20));
    std::vector<SubjectRecord> recs(ds.records().begin(), ds.records().end());
    for (std::size_t i = recs.size() - 1; i > 0; --i) std::swap(recs[i], recs[rng.below(i + 1)]);
    const auto a = sufficient_stats(ds);
    const auto b = sufficient_stats(TrialDataset::from_records(recs));
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(a.arms[j].n == b.arms[j].n);
      CHECK(a.arms[j].mean_pre == doctest::Approx(b.arms[j].mean_pre).epsilon(1e-13));
      CHECK(a.arms[j].mean_post == doctest::Approx(b.arms[j].mean_post).epsilon(1e-13));
      CHECK(a.arms[j].ss_pre == doctest::Approx(b.arms[j].ss_pre).epsilon(1e-12));
      CHECK(a.arms[j].ss_post == doctest::Approx(b.arms[j].ss_post).epsilon(1e-12));
      CHECK(a.arms[j].sp_cross == doctest::Approx(b.arms[j].sp_cross).epsilon(1e-12));
      CHECK(std::abs(a.arms[j].correlation()) <= 1.0);
    }
    CHECK(a.var_pre == doctest::Approx(b.var_pre).epsilon(1e-12));
  }
}

TEST_CASE("long format has two rows per subject") {
  const auto rows = to_long_format(d4());
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].subject_id == rows[1].subject_id);
  CHECK(rows[0].time == 0);
  CHECK(rows[1].time == 1);
  CHECK(rows[0].y == 1.0);
  CHECK(rows[1].y == 2.0);
  CHECK(rows[6].arm == 1);
  std::ostringstream out;
  write_long_csv(out, rows);
  CHECK(out.str().starts_with("subject_id,arm,time,y\n"));
}
