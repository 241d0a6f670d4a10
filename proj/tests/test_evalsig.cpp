#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <set>

#include "xlqa/errors.hpp"
#include "xlqa/evalsig.hpp"
#include "xlqa/rng.hpp"

using namespace xlqa;
using namespace xlqa::evalsig;
using corpus::MinimalAnswer;
using corpus::QAExample;
using qatask::QAPrediction;

namespace {

QAExample gold(const std::string& id, std::optional<int> passage,
               MinimalAnswer minimal = {MinimalAnswer::Kind::Null, 0, 0},
               const std::string& qlang = "en", const std::string& clang = "en") {
  QAExample ex;
  ex.id = id;
  ex.question_lang = qlang;
  ex.context_lang = clang;
  ex.question = "q";
  ex.context = std::string(128, 'x');
  ex.passages = {{0, 64}, {64, 128}};
  ex.gold_passage = passage;
  ex.gold_minimal = minimal;
  return ex;
}

QAPrediction pred(const std::string& id, std::optional<int> passage,
                  MinimalAnswer minimal = {MinimalAnswer::Kind::Null, 0, 0}) {
  QAPrediction p;
  p.id = id;
  p.passage_pred = passage;
  p.minimal_pred = minimal;
  return p;
}

MinimalAnswer span(std::size_t s, std::size_t e) { return {MinimalAnswer::Kind::Span, s, e}; }

}  // namespace

TEST_CASE("passage_f1: all correct non-null predictions score 1") {
  const std::vector<QAExample> golds = {gold("a", 0), gold("b", 1)};
  const std::vector<QAPrediction> preds = {pred("a", 0), pred("b", 1)};
  const auto prf = passage_f1(preds, golds);
  CHECK(prf.f1 == 1.0);
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == 1.0);
}

TEST_CASE("passage_f1: all-NULL predictions against non-null golds score 0") {
  const std::vector<QAExample> golds = {gold("a", 0), gold("b", 1)};
  const std::vector<QAPrediction> preds = {pred("a", std::nullopt), pred("b", std::nullopt)};
  const auto prf = passage_f1(preds, golds);
  CHECK(prf.recall == 0.0);
  CHECK(prf.f1 == 0.0);
}

TEST_CASE("passage_f1: hand-computed harmonic mean") {
  // 3 non-null golds, 2 non-null preds, 1 correct.
  const std::vector<QAExample> golds = {gold("a", 0), gold("b", 1), gold("c", 0)};
  const std::vector<QAPrediction> preds = {pred("a", 0), pred("b", 0), pred("c", std::nullopt)};
  const auto prf = passage_f1(preds, golds);
  CHECK(prf.precision == doctest::Approx(0.5));
  CHECK(prf.recall == doctest::Approx(1.0 / 3.0));
  CHECK(prf.f1 == doctest::Approx(0.4));
}

TEST_CASE("passage_f1: duplicate prediction id is an input error") {
  const std::vector<QAExample> golds = {gold("a", 0)};
  const std::vector<QAPrediction> preds = {pred("a", 0), pred("a", 1)};
  CHECK_THROWS_AS(passage_f1(preds, golds), input_error);
}

TEST_CASE("passage_f1: missing prediction counts as NULL") {
  const std::vector<QAExample> golds = {gold("a", 0), gold("b", 1)};
  const std::vector<QAPrediction> preds = {pred("a", 0)};
  const auto prf = passage_f1(preds, golds);
  CHECK(prf.precision == 1.0);
  CHECK(prf.recall == doctest::Approx(0.5));
}

TEST_CASE("passage_f1 matches a brute-force triple-counting oracle") {
  Rng rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.index(12);
    std::vector<QAExample> golds;
    std::vector<QAPrediction> preds;
    int correct = 0, nn_pred = 0, nn_gold = 0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "e" + std::to_string(i);
      const std::optional<int> g =
          rng.uniform() < 0.3 ? std::nullopt : std::optional<int>(rng.index(2));
      const std::optional<int> p =
          rng.uniform() < 0.3 ? std::nullopt : std::optional<int>(rng.index(2));
      golds.push_back(gold(id, g));
      preds.push_back(pred(id, p));
      if (g) ++nn_gold;
      if (p) ++nn_pred;
      if (g && p && *g == *p) ++correct;
    }
    const auto prf = passage_f1(preds, golds);
    const double precision = nn_pred ? static_cast<double>(correct) / nn_pred : 0.0;
    const double recall = nn_gold ? static_cast<double>(correct) / nn_gold : 0.0;
    const double f1 =
        precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    CHECK(prf.precision == precision);
    CHECK(prf.recall == recall);
    CHECK(prf.f1 == f1);
  }
}

TEST_CASE("span_f1: basics") {
  CHECK(span_f1({3, 9}, {3, 9}) == 1.0);
  CHECK(span_f1({0, 5}, {5, 10}) == 0.0);
  CHECK(span_f1({0, 10}, {5, 15}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(span_f1({5, 3}, {0, 1}), input_error);
  // zero-length operands
  CHECK(span_f1({4, 4}, {4, 4}) == 1.0);
  CHECK(span_f1({4, 4}, {5, 5}) == 0.0);
  CHECK(span_f1({4, 4}, {0, 9}) == 0.0);
}

TEST_CASE("span_f1: symmetric under swapping pred and gold") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t a = rng.below(40), b = rng.below(40);
    const std::size_t c = rng.below(40), d = rng.below(40);
    const std::pair<std::size_t, std::size_t> s1{std::min(a, b), std::max(a, b)};
    const std::pair<std::size_t, std::size_t> s2{std::min(c, d), std::max(c, d)};
    CHECK(span_f1(s1, s2) == span_f1(s2, s1));
  }
}

TEST_CASE("span_f1 matches a brute-force byte-set oracle on 1000 random pairs") {
  Rng rng(31415);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t a = rng.below(50), b = rng.below(50);
    const std::size_t c = rng.below(50), d = rng.below(50);
    const std::pair<std::size_t, std::size_t> p{std::min(a, b), std::max(a, b)};
    const std::pair<std::size_t, std::size_t> g{std::min(c, d), std::max(c, d)};

    std::set<std::size_t> pb, gb;
    for (std::size_t i = p.first; i < p.second; ++i) pb.insert(i);
    for (std::size_t i = g.first; i < g.second; ++i) gb.insert(i);
    double expected;
    if (pb.empty() || gb.empty()) {
      expected = p == g ? 1.0 : 0.0;
    } else {
      std::size_t overlap = 0;
      for (const auto x : pb) overlap += gb.count(x);
      if (overlap == 0) {
        expected = 0.0;
      } else {
        const double prec = static_cast<double>(overlap) / pb.size();
        const double rec = static_cast<double>(overlap) / gb.size();
        expected = 2 * prec * rec / (prec + rec);
      }
    }
    CHECK(span_f1(p, g) == expected);  // exact, same double arithmetic path
  }
}

TEST_CASE("minimal_answer_f1: exact matches score 1, half overlap scores 0.5") {
  {
    const std::vector<QAExample> golds = {gold("a", 0, span(0, 10)), gold("b", 0, span(5, 9))};
    const std::vector<QAPrediction> preds = {pred("a", 0, span(0, 10)), pred("b", 0, span(5, 9))};
    CHECK(minimal_answer_f1(preds, golds).f1 == 1.0);
  }
  {
    const std::vector<QAExample> golds = {gold("a", 0, span(5, 15))};
    const std::vector<QAPrediction> preds = {pred("a", 0, span(0, 10))};
    CHECK(minimal_answer_f1(preds, golds).f1 == doctest::Approx(0.5));
  }
}

TEST_CASE("minimal_answer_f1: YES against NO contributes zero") {
  const std::vector<QAExample> golds = {gold("a", 0, {MinimalAnswer::Kind::Yes, 0, 0})};
  const std::vector<QAPrediction> preds = {pred("a", 0, {MinimalAnswer::Kind::No, 0, 0})};
  CHECK(minimal_answer_f1(preds, golds).f1 == 0.0);
}

TEST_CASE("bootstrap: self-comparison and strict dominance") {
  std::vector<QAExample> golds;
  std::vector<QAPrediction> exact, wrong;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "e" + std::to_string(i);
    golds.push_back(gold(id, 0, span(0, 10)));
    exact.push_back(pred(id, 0, span(0, 10)));
    wrong.push_back(pred(id, 1, span(20, 30)));
  }
  SUBCASE("identical prediction sets tie every resample") {
    const auto result = bootstrap_significance(exact, exact, golds, Metric::Minimal, 1000, 7);
    CHECK(result.p_value == 1.0);
    CHECK(result.win_fraction == 0.0);
  }
  SUBCASE("a strictly better system wins every resample") {
    for (const auto metric : {Metric::Passage, Metric::Minimal}) {
      const auto result = bootstrap_significance(exact, wrong, golds, metric, 1000, 7);
      CHECK(result.p_value == 0.0);
      CHECK(result.win_fraction == 1.0);
    }
  }
  SUBCASE("fixed seed is bit-identical") {
    const auto r1 = bootstrap_significance(exact, wrong, golds, Metric::Minimal, 500, 99);
    const auto r2 = bootstrap_significance(exact, wrong, golds, Metric::Minimal, 500, 99);
    CHECK(r1.p_value == r2.p_value);
    CHECK(r1.win_fraction == r2.win_fraction);
  }
  SUBCASE("resample floor and id coverage validated") {
    CHECK_THROWS_AS(bootstrap_significance(exact, exact, golds, Metric::Minimal, 50, 1),
                    input_error);
    auto missing = exact;
    missing.pop_back();
    CHECK_THROWS_AS(bootstrap_significance(exact, missing, golds, Metric::Minimal, 100, 1),
                    input_error);
  }
}

TEST_CASE("crosstab: identical fully-correct systems fill only the correct-correct cell") {
  std::vector<QAExample> golds;
  std::vector<QAPrediction> preds;
  for (int i = 0; i < 5; ++i) {
    const std::string id = "e" + std::to_string(i);
    golds.push_back(gold(id, 0, span(0, 10)));
    preds.push_back(pred(id, 0, span(0, 10)));
  }
  const auto counts = crosstab_correctness(preds, preds, golds);
  CHECK(counts.both_correct == 5);
  CHECK(counts.x_correct_y_wrong == 0);
  CHECK(counts.x_wrong_y_correct == 0);
  CHECK(counts.both_wrong == 0);
}

TEST_CASE("crosstab: partially correct examples are excluded from every cell") {
  const std::vector<QAExample> golds = {gold("a", 0, span(0, 10))};
  const std::vector<QAPrediction> x = {pred("a", 0, span(0, 5))};  // F1 strictly inside (0,1)
  const std::vector<QAPrediction> y = {pred("a", 0, span(0, 10))};
  const auto counts = crosstab_correctness(x, y, golds);
  CHECK(counts.both_correct + counts.x_correct_y_wrong + counts.x_wrong_y_correct +
            counts.both_wrong ==
        0);
  CHECK(counts.excluded == 1);
}

TEST_CASE("crosstab: five-example hand tally") {
  std::vector<QAExample> golds = {gold("a", 0, span(0, 10)), gold("b", 0, span(0, 10)),
                                  gold("c", 0, span(0, 10)), gold("d", 0, span(0, 10)),
                                  gold("e", 0, {MinimalAnswer::Kind::Null, 0, 0})};
  const std::vector<QAPrediction> x = {
      pred("a", 0, span(0, 10)),   // correct
      pred("b", 0, span(0, 10)),   // correct
      pred("c", 0, span(20, 30)),  // wrong
      pred("d", 0, span(20, 30)),  // wrong
      pred("e", std::nullopt),     // null-null: correct
  };
  const std::vector<QAPrediction> y = {
      pred("a", 0, span(0, 10)),   // correct
      pred("b", 0, span(20, 30)),  // wrong
      pred("c", 0, span(0, 10)),   // correct
      pred("d", 0, span(20, 30)),  // wrong
      pred("e", 0, span(0, 10)),   // gold null, pred non-null: wrong
  };
  const auto counts = crosstab_correctness(x, y, golds);
  CHECK(counts.both_correct == 1);
  CHECK(counts.x_correct_y_wrong == 2);
  CHECK(counts.x_wrong_y_correct == 1);
  CHECK(counts.both_wrong == 1);
  // cells sum to the fully-decided examples
  CHECK(counts.both_correct + counts.x_correct_y_wrong + counts.x_wrong_y_correct +
            counts.both_wrong ==
        5);
}

TEST_CASE("build_report groups by language pair and averages rows") {
  std::vector<QAExample> golds;
  std::vector<QAPrediction> preds;
  int k = 0;
  for (const std::string clang : {"ar", "bn"}) {
    for (int i = 0; i < 4; ++i, ++k) {
      const std::string id = "e" + std::to_string(k);
      golds.push_back(gold(id, 0, span(0, 10), "en", clang));
      // All correct in ar, all wrong in bn.
      preds.push_back(clang == "ar" ? pred(id, 0, span(0, 10)) : pred(id, 1, span(20, 24)));
    }
  }
  const auto report = build_report(preds, golds);
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows[0];
  CHECK(row.question_lang == "en");
  REQUIRE(row.cells.size() == 2);
  CHECK(row.cells[0].context_lang == "ar");
  CHECK(row.cells[0].passage_f1 == 1.0);
  CHECK(row.cells[1].passage_f1 == 0.0);
  CHECK(row.avg_passage_f1 == doctest::Approx(0.5));
  CHECK(row.cells[0].count == 4);
}

TEST_CASE("render_report: the published mBERT row renders with average 54.4") {
  EvalReport report;
  EvalRow row;
  row.question_lang = "en";
  const std::vector<std::pair<std::string, double>> cells = {
      {"ar", 0.764}, {"bn", 0.430}, {"sw", 0.609}, {"ko", 0.373}};
  double total = 0.0;
  for (const auto& [clang, f1] : cells) {
    EvalCell cell;
    cell.question_lang = "en";
    cell.context_lang = clang;
    cell.passage_f1 = f1;
    cell.minimal_f1 = f1;
    cell.count = 1;
    total += f1;
    row.cells.push_back(cell);
  }
  row.avg_passage_f1 = total / 4.0;
  row.avg_minimal_f1 = total / 4.0;
  report.rows.push_back(row);

  const auto tsv = render_report(report, ReportFormat::Tsv);
  for (const char* needle : {"76.4", "43.0", "60.9", "37.3", "54.4"}) {
    CHECK(tsv.find(needle) != std::string::npos);
  }
  const auto md = render_report(report, ReportFormat::Markdown);
  for (const char* needle : {"76.4", "43.0", "60.9", "37.3", "54.4"}) {
    CHECK(md.find(needle) != std::string::npos);
  }
}

TEST_CASE("render_report: empty report renders headers only") {
  const auto tsv = render_report(EvalReport{}, ReportFormat::Tsv);
  CHECK(tsv.find("question_lang") != std::string::npos);
  CHECK(tsv.find("avg") != std::string::npos);
}

TEST_CASE("render_report: rendered averages stay within printed precision of cell means") {
  Rng rng(606);
  for (int trial = 0; trial < 50; ++trial) {
    EvalReport report;
    EvalRow row;
    row.question_lang = "xx";
    const int n = 1 + rng.index(5);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      EvalCell cell;
      cell.question_lang = "xx";
      cell.context_lang = "c" + std::to_string(i);
      cell.passage_f1 = rng.uniform();
      cell.minimal_f1 = rng.uniform();
      total += cell.passage_f1;
      row.cells.push_back(cell);
    }
    row.avg_passage_f1 = total / n;
    report.rows.push_back(row);
    const auto tsv = render_report(report, ReportFormat::Tsv);
    // Parse the rendered passage row back and compare the mean of rendered
    // cells against the rendered average.
    std::istringstream lines(tsv);
    std::string line;
    std::getline(lines, line);  // "# Passage selection"
    std::getline(lines, line);  // header
    std::getline(lines, line);  // data row
    std::istringstream fields(line);
    std::string field;
    std::getline(fields, field, '\t');  // qlang
    std::vector<double> rendered;
    while (std::getline(fields, field, '\t')) rendered.push_back(std::stod(field));
    REQUIRE(rendered.size() == static_cast<std::size_t>(n) + 1);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += rendered[static_cast<std::size_t>(i)];
    mean /= n;
    CHECK(std::abs(rendered.back() - mean) <= 0.1 + 1e-9);
  }
}

TEST_CASE("TSV and Markdown renderings carry identical numeric strings") {
  EvalReport report;
  EvalRow row;
  row.question_lang = "en";
  EvalCell cell;
  cell.question_lang = "en";
  cell.context_lang = "sw";
  cell.passage_f1 = 0.6180339;
  cell.minimal_f1 = 0.2718281;
  cell.count = 9;
  row.cells.push_back(cell);
  row.avg_passage_f1 = cell.passage_f1;
  row.avg_minimal_f1 = cell.minimal_f1;
  report.rows.push_back(row);
  const auto tsv = render_report(report, ReportFormat::Tsv);
  const auto md = render_report(report, ReportFormat::Markdown);
  for (const char* needle : {"61.8", "27.2"}) {
    CHECK(tsv.find(needle) != std::string::npos);
    CHECK(md.find(needle) != std::string::npos);
  }
}

TEST_CASE("per_example_minimal_score handles null combinations") {
  const MinimalAnswer null_ans{MinimalAnswer::Kind::Null, 0, 0};
  CHECK(per_example_minimal_score(null_ans, null_ans) == 1.0);
  CHECK(per_example_minimal_score(null_ans, span(0, 5)) == 0.0);
  CHECK(per_example_minimal_score(span(0, 5), null_ans) == 0.0);
  CHECK(per_example_minimal_score(span(0, 5), span(0, 5)) == 1.0);
}

TEST_CASE("all F1 values stay inside [0,1] on random inputs") {
  Rng rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.index(10);
    std::vector<QAExample> golds;
    std::vector<QAPrediction> preds;
    for (int i = 0; i < n; ++i) {
      const std::string id = "e" + std::to_string(i);
      MinimalAnswer gm;
      const double gr = rng.uniform();
      if (gr < 0.4) {
        gm = span(rng.below(20), 20 + rng.below(20));
      } else if (gr < 0.6) {
        gm = {rng.uniform() < 0.5 ? MinimalAnswer::Kind::Yes : MinimalAnswer::Kind::No, 0, 0};
      }
      golds.push_back(gold(id, rng.uniform() < 0.7 ? std::optional<int>(rng.index(2)) : std::nullopt, gm));
      MinimalAnswer pm;
      const double pr = rng.uniform();
      if (pr < 0.4) {
        pm = span(rng.below(20), 20 + rng.below(20));
      } else if (pr < 0.6) {
        pm = {rng.uniform() < 0.5 ? MinimalAnswer::Kind::Yes : MinimalAnswer::Kind::No, 0, 0};
      }
      preds.push_back(pred(id, rng.uniform() < 0.7 ? std::optional<int>(rng.index(2)) : std::nullopt, pm));
    }
    const auto p = passage_f1(preds, golds);
    const auto mrf = minimal_answer_f1(preds, golds);
    for (const double v : {p.precision, p.recall, p.f1, mrf.precision, mrf.recall, mrf.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}
