#ifndef XLQA_EVALSIG_HPP
#define XLQA_EVALSIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xlqa/corpus.hpp"
#include "xlqa/qatask.hpp"

namespace xlqa::evalsig {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision over non-null predictions, recall over non-null golds; a match
// is an equal passage index. Golds without a prediction count as NULL.
PRF passage_f1(const std::vector<qatask::QAPrediction>& preds,
               const std::vector<corpus::QAExample>& golds);

// Byte-overlap F1 between two spans. Zero-length operands score 0 unless
// both are empty and equal.
double span_f1(std::pair<std::size_t, std::size_t> pred, std::pair<std::size_t, std::size_t> gold);

// Aggregate minimal-answer F1 with per-example span_f1 as partial credit;
// YES/NO answers score 1 on exact match, 0 otherwise.
PRF minimal_answer_f1(const std::vector<qatask::QAPrediction>& preds,
                      const std::vector<corpus::QAExample>& golds);

// Per-example minimal-answer credit in [0, 1]; null-null counts as 1.
double per_example_minimal_score(const corpus::MinimalAnswer& pred,
                                 const corpus::MinimalAnswer& gold);

enum class Metric { Passage, Minimal };

struct SignificanceResult {
  double p_value = 0.0;       // fraction of resamples where A's score <= B's
  double win_fraction = 0.0;  // fraction where A's score > B's
  int resamples = 0;
  std::uint64_t seed = 0;
};

// Paired bootstrap over example ids, one-sided with A hypothesized better;
// ties count against A.
SignificanceResult bootstrap_significance(const std::vector<qatask::QAPrediction>& preds_a,
                                          const std::vector<qatask::QAPrediction>& preds_b,
                                          const std::vector<corpus::QAExample>& golds,
                                          Metric metric, int resamples, std::uint64_t seed);

// Joint correct/wrong counts of fully-correct (minimal F1 == 1) vs
// fully-wrong (== 0) examples; partially-correct ones are excluded.
struct CrosstabCounts {
  long both_correct = 0;
  long x_correct_y_wrong = 0;
  long x_wrong_y_correct = 0;
  long both_wrong = 0;
  long excluded = 0;
};

CrosstabCounts crosstab_correctness(const std::vector<qatask::QAPrediction>& preds_x,
                                    const std::vector<qatask::QAPrediction>& preds_y,
                                    const std::vector<corpus::QAExample>& golds);

struct EvalCell {
  std::string question_lang;
  std::string context_lang;
  double passage_f1 = 0.0;
  double minimal_f1 = 0.0;
  std::size_t count = 0;
};

struct EvalRow {
  std::string question_lang;
  std::vector<EvalCell> cells;  // sorted by context_lang
  double avg_passage_f1 = 0.0;  // arithmetic mean over cells
  double avg_minimal_f1 = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by question_lang
};

EvalReport build_report(const std::vector<qatask::QAPrediction>& preds,
                        const std::vector<corpus::QAExample>& golds);

enum class ReportFormat { Tsv, Markdown };

// F1 rendered as a percentage with one decimal.
std::string render_report(const EvalReport& report, ReportFormat format);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

void save_significance(const SignificanceResult& result, Metric metric, const std::string& path);

}  // namespace xlqa::evalsig

#endif  // XLQA_EVALSIG_HPP
