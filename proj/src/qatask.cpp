#include "xlqa/qatask.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "xlqa/checkpoint.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

namespace xlqa::qatask {

using autodiff::Tape;
using autodiff::Value;
using corpus::MinimalAnswer;
using corpus::QAExample;
using nlohmann::json;
using nlohmann::ordered_json;

void QATuneConfig::validate() const {
  if (learning_rate < 0.0) throw input_error("qa tune config: learning_rate must be >= 0");
  if (epochs <= 0) throw input_error("qa tune config: epochs must be positive");
  if (batch_size <= 0) throw input_error("qa tune config: batch_size must be positive");
}

QAModel init_qa_model(encoder::EncoderParams enc, std::uint64_t seed) {
  enc.config.validate();
  const int h = enc.config.hidden_dim;
  Rng rng(seed);
  auto uniform_matrix = [&](int rows, int cols) {
    const double scale = std::sqrt(6.0 / (rows + cols));
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
    }
    return m;
  };
  QAModel model;
  model.enc = std::move(enc);
  model.heads.passage_w = uniform_matrix(h, 1);
  model.heads.passage_b = Matrix::Zero(1, 1);
  model.heads.null_bias = Matrix::Zero(1, 1);
  model.heads.type_w = uniform_matrix(h, 4);
  model.heads.type_b = Matrix::Zero(1, 4);
  model.heads.start_w = uniform_matrix(h, 1);
  model.heads.start_b = Matrix::Zero(1, 1);
  model.heads.end_w = uniform_matrix(h, 1);
  model.heads.end_b = Matrix::Zero(1, 1);
  return model;
}

ModelInput build_model_input(const corpus::Vocabulary& vocab, const std::string& question,
                             const std::string& passage_text, int max_len) {
  if (max_len < 3) throw input_error("build_model_input: max_len must be >= 3");
  const auto q_tokens = corpus::tokenize(question);
  std::vector<std::vector<int>> q_sub;
  int q_total = 0;
  for (const auto& tok : q_tokens) {
    q_sub.push_back(vocab.encode_word(tok.surface));
    q_total += static_cast<int>(q_sub.back().size());
  }
  if (q_total + 3 > max_len) {
    throw input_error("build_model_input: question occupies " + std::to_string(q_total) +
                      " subwords, exceeding max_len - 3 = " + std::to_string(max_len - 3));
  }

  ModelInput input;
  auto singleton = [&](int id) {
    const int pos = static_cast<int>(input.ids.size());
    input.ids.push_back(id);
    input.word_ranges.emplace_back(pos, pos + 1);
  };
  singleton(corpus::Vocabulary::kCls);
  for (const auto& sub : q_sub) {
    const int start = static_cast<int>(input.ids.size());
    input.ids.insert(input.ids.end(), sub.begin(), sub.end());
    input.word_ranges.emplace_back(start, static_cast<int>(input.ids.size()));
  }
  singleton(corpus::Vocabulary::kSep);

  const int budget = max_len - 1 - static_cast<int>(input.ids.size());
  int used = 0;
  for (const auto& tok : corpus::tokenize(passage_text)) {
    if (used == budget) break;
    const auto sub = vocab.encode_word(tok.surface);
    const int start = static_cast<int>(input.ids.size());
    std::size_t byte_at = tok.byte_start;
    bool any = false;
    for (const int id : sub) {
      if (used == budget) break;
      const std::size_t len = vocab.token_of(id).size();
      input.offsets.push_back({static_cast<int>(input.ids.size()), byte_at, byte_at + len});
      input.ids.push_back(id);
      byte_at += len;
      ++used;
      any = true;
    }
    if (any) input.word_ranges.emplace_back(start, static_cast<int>(input.ids.size()));
  }
  singleton(corpus::Vocabulary::kSep);
  return input;
}

namespace {

struct HeadLeaves {
  Value passage_w, passage_b, null_bias, type_w, type_b, start_w, start_b, end_w, end_b;
};

HeadLeaves make_head_leaves(Tape& tape, const QAHeads& heads, bool trainable) {
  HeadLeaves l;
  l.passage_w = tape.leaf(heads.passage_w, trainable);
  l.passage_b = tape.leaf(heads.passage_b, trainable);
  l.null_bias = tape.leaf(heads.null_bias, trainable);
  l.type_w = tape.leaf(heads.type_w, trainable);
  l.type_b = tape.leaf(heads.type_b, trainable);
  l.start_w = tape.leaf(heads.start_w, trainable);
  l.start_b = tape.leaf(heads.start_b, trainable);
  l.end_w = tape.leaf(heads.end_w, trainable);
  l.end_b = tape.leaf(heads.end_b, trainable);
  return l;
}

QAHeads collect_head_grads(const Tape& tape, const HeadLeaves& l) {
  QAHeads g;
  g.passage_w = tape.grad(l.passage_w);
  g.passage_b = tape.grad(l.passage_b);
  g.null_bias = tape.grad(l.null_bias);
  g.type_w = tape.grad(l.type_w);
  g.type_b = tape.grad(l.type_b);
  g.start_w = tape.grad(l.start_w);
  g.start_b = tape.grad(l.start_b);
  g.end_w = tape.grad(l.end_w);
  g.end_b = tape.grad(l.end_b);
  return g;
}

// CLS-position vector of the final layer as a 1 x h value.
Value encode_cls(Tape& tape, const encoder::EncoderLeaves& leaves,
                 const encoder::EncoderConfig& config, const ModelInput& input, Value* out_seq) {
  const auto acts = encoder::encode_on_tape(tape, leaves, config, input.ids);
  const Value seq = acts.back();
  if (out_seq) *out_seq = seq;
  return tape.rows(seq, {0});
}

Value linear_scalar(Tape& tape, Value vec_1xh, Value w, Value b) {
  return tape.add(tape.matmul(vec_1xh, w), b);
}

// 1 x k logits over the passage positions listed in `offsets`.
Value position_logits(Tape& tape, Value seq, const std::vector<ModelInput::OffsetEntry>& offsets,
                      Value w, Value b) {
  std::vector<int> positions;
  positions.reserve(offsets.size());
  for (const auto& e : offsets) positions.push_back(e.position);
  const Value scores = tape.add_rowvec(tape.matmul(tape.rows(seq, positions), w), b);
  return tape.transpose(scores);
}

std::string passage_text(const QAExample& ex, int index) {
  const auto [s, e] = ex.passages[static_cast<std::size_t>(index)];
  return ex.context.substr(s, e - s);
}

int answer_type_target(const QAExample& ex) {
  switch (ex.gold_minimal.kind) {
    case MinimalAnswer::Kind::Span:
      return static_cast<int>(AnswerType::Span);
    case MinimalAnswer::Kind::Yes:
      return static_cast<int>(AnswerType::Yes);
    case MinimalAnswer::Kind::No:
      return static_cast<int>(AnswerType::No);
    case MinimalAnswer::Kind::Null:
      return static_cast<int>(AnswerType::Null);
  }
  return static_cast<int>(AnswerType::Null);
}

}  // namespace

PassageScores score_passages(const QAModel& model, const corpus::Vocabulary& vocab,
                             const QAExample& example) {
  PassageScores out;
  out.null_score = model.heads.null_bias(0, 0);
  for (std::size_t i = 0; i < example.passages.size(); ++i) {
    Tape tape;
    const auto leaves = encoder::make_leaves(tape, model.enc, false);
    const auto heads = make_head_leaves(tape, model.heads, false);
    const auto input = build_model_input(vocab, example.question,
                                         passage_text(example, static_cast<int>(i)),
                                         model.enc.config.max_seq_len);
    const Value cls = encode_cls(tape, leaves, model.enc.config, input, nullptr);
    out.scores.push_back(tape.value(linear_scalar(tape, cls, heads.passage_w, heads.passage_b))(0, 0));
  }
  int best = -1;
  for (std::size_t i = 0; i < out.scores.size(); ++i) {
    if (best < 0 || out.scores[i] > out.scores[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(i);  // strict >: ties stay with the lowest index
    }
  }
  if (best >= 0 && out.scores[static_cast<std::size_t>(best)] > out.null_score) {
    out.best = best;
  }
  return out;
}

MinimalDecision score_minimal(const QAModel& model, const corpus::Vocabulary& vocab,
                              const QAExample& example, int chosen_passage) {
  if (chosen_passage < 0 || chosen_passage >= static_cast<int>(example.passages.size())) {
    throw contract_error("score_minimal: chosen passage out of range");
  }
  Tape tape;
  const auto leaves = encoder::make_leaves(tape, model.enc, false);
  const auto heads = make_head_leaves(tape, model.heads, false);
  const auto input = build_model_input(vocab, example.question,
                                       passage_text(example, chosen_passage),
                                       model.enc.config.max_seq_len);
  Value seq;
  const Value cls = encode_cls(tape, leaves, model.enc.config, input, &seq);
  const Matrix type_scores =
      tape.value(tape.add_rowvec(tape.matmul(cls, heads.type_w), heads.type_b));
  int type = 0;
  for (int t = 1; t < 4; ++t) {
    if (type_scores(0, t) > type_scores(0, type)) type = t;
  }

  MinimalDecision out;
  if (type != static_cast<int>(AnswerType::Span)) {
    out.answer.kind = type == static_cast<int>(AnswerType::Yes)  ? MinimalAnswer::Kind::Yes
                      : type == static_cast<int>(AnswerType::No) ? MinimalAnswer::Kind::No
                                                                 : MinimalAnswer::Kind::Null;
    out.score = type_scores(0, type);
    return out;
  }
  if (input.offsets.empty()) {
    // SPAN chosen but the passage contributed no positions (empty or fully
    // truncated); nothing to point at.
    out.answer.kind = MinimalAnswer::Kind::Null;
    out.score = type_scores(0, static_cast<int>(AnswerType::Null));
    return out;
  }
  const Matrix start_scores =
      tape.value(position_logits(tape, seq, input.offsets, heads.start_w, heads.start_b));
  const Matrix end_scores =
      tape.value(position_logits(tape, seq, input.offsets, heads.end_w, heads.end_b));
  const int k = static_cast<int>(input.offsets.size());
  int best_i = -1, best_j = -1;
  double best_score = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k && j - i <= model.max_span_subwords; ++j) {
      const double s = start_scores(0, i) + end_scores(0, j);
      // Ties: earliest start, then shortest span.
      if (best_i < 0 || s > best_score) {
        best_score = s;
        best_i = i;
        best_j = j;
      }
    }
  }
  const auto [ps, pe] = example.passages[static_cast<std::size_t>(chosen_passage)];
  (void)pe;
  out.answer.kind = MinimalAnswer::Kind::Span;
  out.answer.span_start = ps + input.offsets[static_cast<std::size_t>(best_i)].byte_start;
  out.answer.span_end = ps + input.offsets[static_cast<std::size_t>(best_j)].byte_end;
  out.score = best_score;
  return out;
}

std::vector<QAPrediction> predict(const QAModel& model, const corpus::Vocabulary& vocab,
                                  const std::vector<QAExample>& examples) {
  std::vector<QAPrediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    QAPrediction pred;
    pred.id = ex.id;
    const auto ps = score_passages(model, vocab, ex);
    if (ps.best) {
      pred.passage_pred = ps.best;
      pred.passage_score = ps.scores[static_cast<std::size_t>(*ps.best)];
      const auto minimal = score_minimal(model, vocab, ex, *ps.best);
      pred.minimal_pred = minimal.answer;
      pred.minimal_score = minimal.score;
    } else {
      pred.passage_score = ps.null_score;
      pred.minimal_pred.kind = MinimalAnswer::Kind::Null;
      pred.minimal_score = 0.0;
    }
    out.push_back(std::move(pred));
  }
  return out;
}

namespace {

// Joint loss for one example: passage CE over [NULL, passages...], plus type
// CE and (for spans reachable after truncation) start/end CE on the gold
// passage.
Value example_loss(Tape& tape, const encoder::EncoderLeaves& leaves, const HeadLeaves& heads,
                   const QAModel& model, const corpus::Vocabulary& vocab, const QAExample& ex) {
  std::vector<Value> terms;
  std::vector<Value> passage_logits;
  passage_logits.push_back(heads.null_bias);

  for (std::size_t i = 0; i < ex.passages.size(); ++i) {
    const auto input = build_model_input(vocab, ex.question, passage_text(ex, static_cast<int>(i)),
                                         model.enc.config.max_seq_len);
    Value seq;
    const Value cls = encode_cls(tape, leaves, model.enc.config, input, &seq);
    passage_logits.push_back(linear_scalar(tape, cls, heads.passage_w, heads.passage_b));

    if (ex.gold_passage && static_cast<int>(i) == *ex.gold_passage) {
      const Value type_logits = tape.add_rowvec(tape.matmul(cls, heads.type_w), heads.type_b);
      terms.push_back(tape.cross_entropy(type_logits, answer_type_target(ex)));
      if (ex.gold_minimal.kind == MinimalAnswer::Kind::Span && !input.offsets.empty()) {
        const auto [pstart, pend] = ex.passages[i];
        (void)pend;
        const std::size_t gs = ex.gold_minimal.span_start - pstart;
        const std::size_t ge = ex.gold_minimal.span_end - pstart;
        int first = -1, last = -1;
        for (std::size_t k = 0; k < input.offsets.size(); ++k) {
          const auto& e = input.offsets[k];
          if (e.byte_start < ge && e.byte_end > gs) {
            if (first < 0) first = static_cast<int>(k);
            last = static_cast<int>(k);
          }
        }
        if (first >= 0) {  // the gold span survived truncation
          const Value start_logits =
              position_logits(tape, seq, input.offsets, heads.start_w, heads.start_b);
          const Value end_logits =
              position_logits(tape, seq, input.offsets, heads.end_w, heads.end_b);
          terms.push_back(tape.cross_entropy(start_logits, first));
          terms.push_back(tape.cross_entropy(end_logits, last));
        }
      }
    }
  }
  const int target = ex.gold_passage ? *ex.gold_passage + 1 : 0;
  terms.push_back(tape.cross_entropy(tape.concat_cols(passage_logits), target));
  // NULL-passage examples also supervise the answer-type head (on the first
  // passage's encoding) toward NULL, so prediction-time type scores are
  // calibrated for unanswerables.
  if (!ex.gold_passage && !ex.passages.empty()) {
    const auto input = build_model_input(vocab, ex.question, passage_text(ex, 0),
                                         model.enc.config.max_seq_len);
    const Value cls = encode_cls(tape, leaves, model.enc.config, input, nullptr);
    const Value type_logits = tape.add_rowvec(tape.matmul(cls, heads.type_w), heads.type_b);
    terms.push_back(tape.cross_entropy(type_logits, static_cast<int>(AnswerType::Null)));
  }
  return tape.add_scalars(terms);
}

void accumulate_heads(QAHeads& into, const QAHeads& grads) {
  std::vector<Matrix*> a, b;
  for_each_head_tensor(into, [&](const std::string&, Matrix& m) { a.push_back(&m); });
  for_each_head_tensor(const_cast<QAHeads&>(grads),
                       [&](const std::string&, Matrix& m) { b.push_back(&m); });
  for (std::size_t i = 0; i < a.size(); ++i) *a[i] += *b[i];
}

QAHeads zero_heads(const QAHeads& shape) {
  QAHeads z = shape;
  for_each_head_tensor(z, [](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

}  // namespace

TuneResult task_tune(QAModel model, const corpus::Vocabulary& vocab,
                     const std::vector<QAExample>& examples, const QATuneConfig& config) {
  config.validate();
  if (examples.empty()) throw input_error("task_tune: example list is empty");
  for (const auto& ex : examples) corpus::validate_example(ex);

  // Flat parameter/grad views over encoder + heads share one optimizer state.
  auto all_tensors = [](QAModel& m) {
    std::vector<Matrix*> out;
    encoder::for_each_tensor(m.enc, [&](const std::string&, Matrix& t) { out.push_back(&t); });
    for_each_head_tensor(m.heads, [&](const std::string&, Matrix& t) { out.push_back(&t); });
    return out;
  };

  std::vector<Matrix> adam_m, adam_v;
  long adam_step = 0;

  Rng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TuneResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_inplace(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      encoder::EncoderParams enc_grads = encoder::zeros_like(model.enc);
      QAHeads head_grads = zero_heads(model.heads);
      for (std::size_t k = start; k < end; ++k) {
        const QAExample& ex = examples[order[k]];
        Tape tape;
        const auto leaves = encoder::make_leaves(tape, model.enc, true);
        const auto heads = make_head_leaves(tape, model.heads, true);
        const Value loss = example_loss(tape, leaves, heads, model, vocab, ex);
        const double value = tape.value(loss)(0, 0);
        if (!std::isfinite(value)) {
          throw error("task_tune: non-finite loss " + std::to_string(value) + " at epoch " +
                      std::to_string(epoch) + ", batch " + std::to_string(start / config.batch_size) +
                      ", example '" + ex.id + "'");
        }
        epoch_loss += value;
        tape.backward(loss);
        encoder::add_into(enc_grads, encoder::collect_grads(tape, leaves, model.enc.config));
        accumulate_heads(head_grads, collect_head_grads(tape, heads));
      }
      const double inv = 1.0 / static_cast<double>(end - start);

      QAModel grads;
      grads.enc = std::move(enc_grads);
      grads.heads = std::move(head_grads);
      auto ps = all_tensors(model);
      auto gs = all_tensors(grads);
      if (config.optimizer == alignft::Optimizer::Sgd) {
        for (std::size_t i = 0; i < ps.size(); ++i) *ps[i] -= config.learning_rate * inv * *gs[i];
      } else {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        if (adam_m.empty()) {
          for (const Matrix* p : ps) {
            adam_m.push_back(Matrix::Zero(p->rows(), p->cols()));
            adam_v.push_back(Matrix::Zero(p->rows(), p->cols()));
          }
        }
        ++adam_step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step));
        for (std::size_t i = 0; i < ps.size(); ++i) {
          const Matrix g = inv * *gs[i];
          adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * g;
          adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * g.cwiseProduct(g);
          const Matrix mhat = adam_m[i] / bc1;
          const Matrix vhat = adam_v[i] / bc2;
          *ps[i] -= config.learning_rate *
                    mhat.cwiseQuotient(vhat.cwiseSqrt() +
                                       Matrix::Constant(vhat.rows(), vhat.cols(), eps));
        }
      }
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(examples.size()));
  }
  result.model = std::move(model);
  return result;
}

void save_qa_model(const std::string& path, const QAModel& model) {
  json meta;
  meta["encoder"] = {{"vocab_size", model.enc.config.vocab_size},
                     {"hidden_dim", model.enc.config.hidden_dim},
                     {"num_layers", model.enc.config.num_layers},
                     {"num_heads", model.enc.config.num_heads},
                     {"ffn_dim", model.enc.config.ffn_dim},
                     {"max_seq_len", model.enc.config.max_seq_len},
                     {"seed", model.enc.config.seed}};
  meta["max_span_subwords"] = model.max_span_subwords;
  std::vector<std::pair<std::string, const Matrix*>> tensors;
  encoder::for_each_tensor(const_cast<encoder::EncoderParams&>(model.enc),
                           [&](const std::string& name, Matrix& m) {
                             tensors.emplace_back("enc." + name, &m);
                           });
  for_each_head_tensor(const_cast<QAHeads&>(model.heads), [&](const std::string& name, Matrix& m) {
    tensors.emplace_back("head." + name, &m);
  });
  checkpoint::write_container(path, "qa_model", meta, tensors);
}

QAModel load_qa_model(const std::string& path) {
  const auto container = checkpoint::read_container(path, "qa_model");
  encoder::EncoderConfig config;
  const auto& ej = container.meta.at("encoder");
  config.vocab_size = ej.at("vocab_size").get<int>();
  config.hidden_dim = ej.at("hidden_dim").get<int>();
  config.num_layers = ej.at("num_layers").get<int>();
  config.num_heads = ej.at("num_heads").get<int>();
  config.ffn_dim = ej.at("ffn_dim").get<int>();
  config.max_seq_len = ej.at("max_seq_len").get<int>();
  config.seed = ej.at("seed").get<std::uint64_t>();
  config.validate();

  QAModel model = init_qa_model(
      [&] {
        encoder::EncoderConfig c = config;
        encoder::EncoderParams p = encoder::init_params(c);
        return p;
      }(),
      0);
  model.max_span_subwords = container.meta.at("max_span_subwords").get<int>();
  encoder::for_each_tensor(model.enc, [&](const std::string& name, Matrix& m) {
    m = container.tensor("enc." + name);
  });
  for_each_head_tensor(model.heads, [&](const std::string& name, Matrix& m) {
    m = container.tensor("head." + name);
  });
  return model;
}

void save_predictions(const std::vector<QAPrediction>& preds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write predictions file: " + path);
  for (const auto& p : preds) {
    ordered_json j;
    j["id"] = p.id;
    if (p.passage_pred) {
      j["passage_pred"] = *p.passage_pred;
    } else {
      j["passage_pred"] = nullptr;
    }
    switch (p.minimal_pred.kind) {
      case MinimalAnswer::Kind::Span:
        j["minimal_pred"] = {{"span", {p.minimal_pred.span_start, p.minimal_pred.span_end}}};
        break;
      case MinimalAnswer::Kind::Yes:
        j["minimal_pred"] = {{"yesno", "YES"}};
        break;
      case MinimalAnswer::Kind::No:
        j["minimal_pred"] = {{"yesno", "NO"}};
        break;
      case MinimalAnswer::Kind::Null:
        j["minimal_pred"] = nullptr;
        break;
    }
    j["passage_score"] = p.passage_score;
    j["minimal_score"] = p.minimal_score;
    out << j.dump() << "\n";
  }
}

std::vector<QAPrediction> load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open predictions file: " + path);
  std::vector<QAPrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      QAPrediction p;
      p.id = j.at("id").get<std::string>();
      if (!j.at("passage_pred").is_null()) p.passage_pred = j.at("passage_pred").get<int>();
      const auto& mp = j.at("minimal_pred");
      if (mp.is_null()) {
        p.minimal_pred.kind = MinimalAnswer::Kind::Null;
      } else if (mp.contains("span")) {
        p.minimal_pred.kind = MinimalAnswer::Kind::Span;
        p.minimal_pred.span_start = mp.at("span").at(0).get<std::size_t>();
        p.minimal_pred.span_end = mp.at("span").at(1).get<std::size_t>();
      } else if (mp.contains("yesno")) {
        const auto v = mp.at("yesno").get<std::string>();
        if (v == "YES") {
          p.minimal_pred.kind = MinimalAnswer::Kind::Yes;
        } else if (v == "NO") {
          p.minimal_pred.kind = MinimalAnswer::Kind::No;
        } else {
          throw format_error(where + ": minimal_pred.yesno must be YES or NO");
        }
      } else {
        throw format_error(where + ": minimal_pred must be a span, a yesno or null");
      }
      p.passage_score = j.at("passage_score").get<double>();
      p.minimal_score = j.at("minimal_score").get<double>();
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw format_error(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace xlqa::qatask
