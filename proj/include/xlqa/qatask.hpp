#ifndef XLQA_QATASK_HPP
#define XLQA_QATASK_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlqa/alignft.hpp"
#include "xlqa/corpus.hpp"
#include "xlqa/encoder.hpp"

namespace xlqa::qatask {

using autodiff::Matrix;

// Answer-type head classes, in tie-break order.
enum class AnswerType { Span = 0, Yes = 1, No = 2, Null = 3 };

struct QAHeads {
  Matrix passage_w, passage_b;  // h x 1, 1 x 1
  Matrix null_bias;             // 1 x 1 learned NULL threshold
  Matrix type_w, type_b;        // h x 4, 1 x 4
  Matrix start_w, start_b;      // h x 1, 1 x 1
  Matrix end_w, end_b;          // h x 1, 1 x 1
};

template <typename Heads, typename Fn>
void for_each_head_tensor(Heads& heads, Fn&& fn) {
  fn("passage_w", heads.passage_w);
  fn("passage_b", heads.passage_b);
  fn("null_bias", heads.null_bias);
  fn("type_w", heads.type_w);
  fn("type_b", heads.type_b);
  fn("start_w", heads.start_w);
  fn("start_b", heads.start_b);
  fn("end_w", heads.end_w);
  fn("end_b", heads.end_b);
}

struct QAModel {
  encoder::EncoderParams enc;
  QAHeads heads;
  int max_span_subwords = 30;
};

QAModel init_qa_model(encoder::EncoderParams enc, std::uint64_t seed);

void save_qa_model(const std::string& path, const QAModel& model);
QAModel load_qa_model(const std::string& path);

// [CLS] question [SEP] passage [SEP] framing with right truncation of the
// passage. Byte offsets are relative to `passage_text`.
struct ModelInput {
  std::vector<int> ids;
  std::vector<std::pair<int, int>> word_ranges;  // partition of all positions
  struct OffsetEntry {
    int position;            // subword index in ids
    std::size_t byte_start;  // into passage_text
    std::size_t byte_end;
  };
  std::vector<OffsetEntry> offsets;  // passage positions only, in order
};

ModelInput build_model_input(const corpus::Vocabulary& vocab, const std::string& question,
                             const std::string& passage_text, int max_len);

struct PassageScores {
  std::vector<double> scores;
  double null_score = 0.0;
  std::optional<int> best;  // highest-scoring passage iff it beats NULL
};

PassageScores score_passages(const QAModel& model, const corpus::Vocabulary& vocab,
                             const corpus::QAExample& example);

struct MinimalDecision {
  corpus::MinimalAnswer answer;  // span offsets in context-document bytes
  double score = 0.0;
};

MinimalDecision score_minimal(const QAModel& model, const corpus::Vocabulary& vocab,
                              const corpus::QAExample& example, int chosen_passage);

struct QATuneConfig {
  double learning_rate = 0.01;
  int epochs = 5;
  int batch_size = 8;
  std::uint64_t seed = 1;
  alignft::Optimizer optimizer = alignft::Optimizer::Sgd;

  void validate() const;
};

struct TuneResult {
  QAModel model;
  std::vector<double> loss_trace;  // mean per-example loss per epoch
};

// Joint cross-entropy over passage labels, answer-type labels and start/end
// positions; all languages trained jointly.
TuneResult task_tune(QAModel model, const corpus::Vocabulary& vocab,
                     const std::vector<corpus::QAExample>& examples, const QATuneConfig& config);

struct QAPrediction {
  std::string id;
  std::optional<int> passage_pred;
  double passage_score = 0.0;
  corpus::MinimalAnswer minimal_pred;
  double minimal_score = 0.0;
};

std::vector<QAPrediction> predict(const QAModel& model, const corpus::Vocabulary& vocab,
                                  const std::vector<corpus::QAExample>& examples);

void save_predictions(const std::vector<QAPrediction>& preds, const std::string& path);
std::vector<QAPrediction> load_predictions(const std::string& path);

}  // namespace xlqa::qatask

#endif  // XLQA_QATASK_HPP
