#include "xlqa/alignft.hpp"

#include <cmath>
#include <map>

#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

namespace xlqa::alignft {

using autodiff::Tape;
using autodiff::Value;
using encoder::EncoderParams;
using encoder::ParamsSnapshot;

void AlignTrainConfig::validate() const {
  if (learning_rate < 0.0) throw input_error("align train config: learning_rate must be >= 0");
  if (epochs <= 0) throw input_error("align train config: epochs must be positive");
  if (batch_size <= 0) throw input_error("align train config: batch_size must be positive");
  if (lambda < 0.0) throw input_error("align train config: lambda must be >= 0");
}

double alignment_loss(const Matrix& source_word_vecs, const Matrix& target_word_vecs,
                      const aligner::AlignmentSet& links) {
  double total = 0.0;
  for (const auto& [p, q] : links.links) {
    if (p < 0 || p >= source_word_vecs.rows() || q < 0 || q >= target_word_vecs.rows()) {
      throw contract_error("alignment_loss: link (" + std::to_string(p) + "," +
                           std::to_string(q) + ") out of range");
    }
    total += (source_word_vecs.row(p) - target_word_vecs.row(q)).squaredNorm();
  }
  return total;
}

double regularization_loss(const Matrix& current_source, const Matrix& initial_source,
                           const Matrix& current_target, const Matrix& initial_target) {
  auto check = [](const Matrix& a, const Matrix& b, const char* side) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw contract_error(std::string("regularization_loss: ") + side +
                           " current/initial shape mismatch");
    }
  };
  check(current_source, initial_source, "source");
  check(current_target, initial_target, "target");
  return (current_source - initial_source).squaredNorm() +
         (current_target - initial_target).squaredNorm();
}

namespace {

struct PreparedPair {
  std::vector<int> src_ids, tgt_ids;
  std::vector<std::pair<int, int>> src_ranges, tgt_ranges;
  std::vector<int> link_p, link_q;
  int corpus_index = 0;
  Matrix init_src, init_tgt;  // snapshot activations at the align layer
};

std::pair<std::vector<PreparedPair>, std::size_t> prepare_pairs(
    const corpus::Vocabulary& vocab, const std::vector<AlignedPair>& pairs,
    const encoder::EncoderConfig& config, const ParamsSnapshot& initial, int layer_idx) {
  std::vector<PreparedPair> prepared;
  prepared.reserve(pairs.size());
  std::size_t skipped = 0;
  for (const auto& pair : pairs) {
    PreparedPair pp;
    pp.corpus_index = pair.corpus_index;
    auto [sids, sranges] = corpus::flatten_subwords(corpus::encode_sentence(vocab, pair.source));
    auto [tids, tranges] = corpus::flatten_subwords(corpus::encode_sentence(vocab, pair.target));
    if (static_cast<int>(sids.size()) > config.max_seq_len ||
        static_cast<int>(tids.size()) > config.max_seq_len || sids.empty() || tids.empty()) {
      ++skipped;
      continue;
    }
    pp.src_ids = std::move(sids);
    pp.src_ranges = std::move(sranges);
    pp.tgt_ids = std::move(tids);
    pp.tgt_ranges = std::move(tranges);
    for (const auto& [p, q] : pair.links.links) {
      if (p < 0 || p >= static_cast<int>(pp.src_ranges.size()) || q < 0 ||
          q >= static_cast<int>(pp.tgt_ranges.size())) {
        throw contract_error("alignment link (" + std::to_string(p) + "," + std::to_string(q) +
                             ") outside sentence pair");
      }
      pp.link_p.push_back(p);
      pp.link_q.push_back(q);
    }
    pp.init_src = encoder::encode(initial.params(), pp.src_ids, layer_idx);
    pp.init_tgt = encoder::encode(initial.params(), pp.tgt_ids, layer_idx);
    prepared.push_back(std::move(pp));
  }
  return {std::move(prepared), skipped};
}

// Records L + lambda * R for one pair on the tape.
Value pair_objective(Tape& tape, const encoder::EncoderLeaves& leaves,
                     const encoder::EncoderConfig& config, const PreparedPair& pp,
                     int layer_idx, double lambda) {
  const auto src_acts = encoder::encode_on_tape(tape, leaves, config, pp.src_ids);
  const auto tgt_acts = encoder::encode_on_tape(tape, leaves, config, pp.tgt_ids);
  const Value src = src_acts[static_cast<std::size_t>(layer_idx)];
  const Value tgt = tgt_acts[static_cast<std::size_t>(layer_idx)];

  std::vector<Value> terms;
  if (!pp.link_p.empty()) {
    const Value src_words = encoder::word_pool_on_tape(tape, src, pp.src_ranges);
    const Value tgt_words = encoder::word_pool_on_tape(tape, tgt, pp.tgt_ranges);
    terms.push_back(tape.sum_squares(
        tape.sub(tape.rows(src_words, pp.link_p), tape.rows(tgt_words, pp.link_q))));
  }
  const Value drift =
      tape.add_scalars({tape.sum_squares(tape.sub(src, tape.constant(pp.init_src))),
                        tape.sum_squares(tape.sub(tgt, tape.constant(pp.init_tgt)))});
  terms.push_back(lambda == 1.0 ? drift : tape.scale(drift, lambda));
  return tape.add_scalars(terms);
}

std::vector<Matrix*> tensor_ptrs(EncoderParams& params) {
  std::vector<Matrix*> out;
  encoder::for_each_tensor(params, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

struct AdamState {
  std::vector<Matrix> m, v;
  long step = 0;
};

void apply_update(EncoderParams& params, const EncoderParams& grads, double lr,
                  Optimizer optimizer, AdamState& adam) {
  auto ps = tensor_ptrs(params);
  auto gs = tensor_ptrs(const_cast<EncoderParams&>(grads));
  if (optimizer == Optimizer::Sgd) {
    for (std::size_t i = 0; i < ps.size(); ++i) *ps[i] -= lr * *gs[i];
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (adam.m.empty()) {
    for (const Matrix* p : ps) {
      adam.m.push_back(Matrix::Zero(p->rows(), p->cols()));
      adam.v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++adam.step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    adam.m[i] = beta1 * adam.m[i] + (1.0 - beta1) * *gs[i];
    adam.v[i] = beta2 * adam.v[i] + (1.0 - beta2) * gs[i]->cwiseProduct(*gs[i]);
    const Matrix mhat = adam.m[i] / bc1;
    const Matrix vhat = adam.v[i] / bc2;
    *ps[i] -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt() +
                                      Matrix::Constant(vhat.rows(), vhat.cols(), eps));
  }
}

}  // namespace

std::vector<AlignedPair> flatten_corpora(const std::vector<AlignedCorpus>& corpora) {
  std::vector<AlignedPair> out;
  for (std::size_t c = 0; c < corpora.size(); ++c) {
    const auto& corpus = corpora[c];
    if (corpus.alignments.size() != corpus.bitext.pairs.size()) {
      throw input_error("corpus " + std::to_string(c) + ": " +
                        std::to_string(corpus.alignments.size()) + " alignment sets for " +
                        std::to_string(corpus.bitext.pairs.size()) + " sentence pairs");
    }
    for (std::size_t i = 0; i < corpus.bitext.pairs.size(); ++i) {
      out.push_back({corpus.bitext.pairs[i].first, corpus.bitext.pairs[i].second,
                     corpus.alignments[i], static_cast<int>(c)});
    }
  }
  return out;
}

double total_objective(const EncoderParams& params, const ParamsSnapshot& initial,
                       const corpus::Vocabulary& vocab, const std::vector<AlignedPair>& batch,
                       int align_layer, double lambda) {
  if (batch.empty()) throw input_error("total_objective: batch is empty");
  const int layer_idx = encoder::resolve_layer(params.config, align_layer);
  const auto [prepared, skipped] = prepare_pairs(vocab, batch, params.config, initial, layer_idx);
  (void)skipped;
  double total = 0.0;
  for (const auto& pp : prepared) {
    Tape tape;
    const auto leaves = encoder::make_leaves(tape, params, false);
    total += tape.value(pair_objective(tape, leaves, params.config, pp, layer_idx, lambda))(0, 0);
  }
  return total;
}

std::pair<double, EncoderParams> objective_with_grads(const EncoderParams& params,
                                                      const ParamsSnapshot& initial,
                                                      const corpus::Vocabulary& vocab,
                                                      const std::vector<AlignedPair>& batch,
                                                      int align_layer, double lambda) {
  if (batch.empty()) throw input_error("objective_with_grads: batch is empty");
  const int layer_idx = encoder::resolve_layer(params.config, align_layer);
  const auto [prepared, skipped] = prepare_pairs(vocab, batch, params.config, initial, layer_idx);
  (void)skipped;
  double total = 0.0;
  EncoderParams grads = encoder::zeros_like(params);
  for (const auto& pp : prepared) {
    Tape tape;
    const auto leaves = encoder::make_leaves(tape, params, true);
    const Value obj = pair_objective(tape, leaves, params.config, pp, layer_idx, lambda);
    total += tape.value(obj)(0, 0);
    tape.backward(obj);
    encoder::add_into(grads, encoder::collect_grads(tape, leaves, params.config));
  }
  return {total, std::move(grads)};
}

TrainResult train_alignment(EncoderParams params, const corpus::Vocabulary& vocab,
                            const std::vector<AlignedCorpus>& corpora,
                            const AlignTrainConfig& config) {
  config.validate();
  params.config.validate();
  const int layer_idx = encoder::resolve_layer(params.config, config.align_layer);

  TrainResult result{EncoderParams{}, ParamsSnapshot(params), {}, 0};
  const auto flat = flatten_corpora(corpora);
  auto [prepared, skipped] = prepare_pairs(vocab, flat, params.config, result.initial, layer_idx);
  result.pairs_skipped = skipped;
  if (prepared.empty()) {
    throw input_error("train_alignment: no usable sentence pairs (all skipped or none given)");
  }

  // The pair plan for one epoch is drawn once from the seed; epochs reshuffle
  // the same plan, so epoch aggregates are comparable across epochs.
  Rng rng(config.seed);
  std::vector<std::size_t> plan;
  if (config.sampling == Sampling::Proportional) {
    for (std::size_t i = 0; i < prepared.size(); ++i) plan.push_back(i);
  } else {
    std::map<int, std::vector<std::size_t>> by_corpus;
    for (std::size_t i = 0; i < prepared.size(); ++i) {
      by_corpus[prepared[i].corpus_index].push_back(i);
    }
    std::size_t quota = 0;
    for (const auto& [idx, members] : by_corpus) quota = std::max(quota, members.size());
    for (const auto& [idx, members] : by_corpus) {
      for (std::size_t k = 0; k < quota; ++k) {
        plan.push_back(members[rng.below(members.size())]);
      }
    }
  }

  AdamState adam;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order = plan;
    shuffle_inplace(order, rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      EncoderParams grads = encoder::zeros_like(params);
      double batch_obj = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const PreparedPair& pp = prepared[order[k]];
        Tape tape;
        const auto leaves = encoder::make_leaves(tape, params, true);
        const Value obj = pair_objective(tape, leaves, params.config, pp, layer_idx,
                                         config.lambda);
        const double value = tape.value(obj)(0, 0);
        if (!std::isfinite(value)) {
          throw error("train_alignment: non-finite objective " + std::to_string(value) +
                      " at epoch " + std::to_string(epoch) + ", batch " +
                      std::to_string(start / config.batch_size) + ", pair " +
                      std::to_string(order[k]));
        }
        batch_obj += value;
        tape.backward(obj);
        encoder::add_into(grads, encoder::collect_grads(tape, leaves, params.config));
      }
      epoch_total += batch_obj;
      encoder::scale_inplace(grads, 1.0 / static_cast<double>(end - start));
      apply_update(params, grads, config.learning_rate, config.optimizer, adam);
    }
    result.epoch_objective.push_back(epoch_total / static_cast<double>(order.size()));
  }
  result.params = std::move(params);
  return result;
}

PairDistanceReport pair_distance_report(const EncoderParams& params,
                                        const ParamsSnapshot& initial,
                                        const corpus::Vocabulary& vocab,
                                        const std::vector<AlignedPair>& pairs, int align_layer,
                                        std::uint64_t seed) {
  const int layer_idx = encoder::resolve_layer(params.config, align_layer);
  const auto [prepared, skipped] = prepare_pairs(vocab, pairs, params.config, initial, layer_idx);
  (void)skipped;

  Rng rng(seed);
  double aligned_sum = 0.0, random_sum = 0.0, drift_sum = 0.0;
  std::size_t aligned_n = 0, random_n = 0, drift_n = 0;
  PairDistanceReport report;
  for (const auto& pp : prepared) {
    const Matrix cur_src = encoder::encode(params, pp.src_ids, layer_idx);
    const Matrix cur_tgt = encoder::encode(params, pp.tgt_ids, layer_idx);
    for (Eigen::Index r = 0; r < cur_src.rows(); ++r) {
      drift_sum += (cur_src.row(r) - pp.init_src.row(r)).norm();
      ++drift_n;
    }
    for (Eigen::Index r = 0; r < cur_tgt.rows(); ++r) {
      drift_sum += (cur_tgt.row(r) - pp.init_tgt.row(r)).norm();
      ++drift_n;
    }
    const Matrix src_words = encoder::word_pool(cur_src, pp.src_ranges);
    const Matrix tgt_words = encoder::word_pool(cur_tgt, pp.tgt_ranges);
    aligner::AlignmentSet linked;
    for (std::size_t k = 0; k < pp.link_p.size(); ++k) {
      aligned_sum += (src_words.row(pp.link_p[k]) - tgt_words.row(pp.link_q[k])).norm();
      ++aligned_n;
      linked.add({pp.link_p[k], pp.link_q[k]});
    }
    const std::size_t want = std::max<std::size_t>(pp.link_p.size(), 1);
    for (std::size_t k = 0; k < want; ++k) {
      for (int attempt = 0; attempt < 40; ++attempt) {
        const int p = rng.index(static_cast<std::size_t>(src_words.rows()));
        const int q = rng.index(static_cast<std::size_t>(tgt_words.rows()));
        if (linked.contains({p, q})) continue;
        random_sum += (src_words.row(p) - tgt_words.row(q)).norm();
        ++random_n;
        break;
      }
    }
    ++report.pairs_used;
  }
  report.links_used = aligned_n;
  if (aligned_n > 0) report.mean_aligned_distance = aligned_sum / static_cast<double>(aligned_n);
  if (random_n > 0) report.mean_random_distance = random_sum / static_cast<double>(random_n);
  report.mean_drift = drift_n > 0 ? drift_sum / static_cast<double>(drift_n) : 0.0;
  return report;
}

}  // namespace xlqa::alignft
