#ifndef XLQA_ALIGNFT_HPP
#define XLQA_ALIGNFT_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "xlqa/aligner.hpp"
#include "xlqa/corpus.hpp"
#include "xlqa/encoder.hpp"

namespace xlqa::alignft {

using autodiff::Matrix;

// One sentence pair with its word alignment, tagged with the index of the
// corpus it came from.
struct AlignedPair {
  corpus::Sentence source;
  corpus::Sentence target;
  aligner::AlignmentSet links;
  int corpus_index = 0;
};

struct AlignedCorpus {
  corpus::ParallelCorpus bitext;
  std::vector<aligner::AlignmentSet> alignments;  // one per pair
};

enum class Sampling { Proportional, UniformPerCorpus };
enum class Optimizer { Sgd, Adam };

struct AlignTrainConfig {
  double learning_rate = 0.05;
  int epochs = 10;
  int batch_size = 8;
  std::uint64_t seed = 1;
  Sampling sampling = Sampling::UniformPerCorpus;
  int align_layer = -1;  // -1 selects the final layer
  double lambda = 1.0;   // weight on the drift term; the objective default is a plain sum
  Optimizer optimizer = Optimizer::Sgd;

  void validate() const;
};

// Sum over links (p, q) of the squared L2 distance between source word
// vector p and target word vector q. 0 for an empty link set.
double alignment_loss(const Matrix& source_word_vecs, const Matrix& target_word_vecs,
                      const aligner::AlignmentSet& links);

// Squared drift of every token position of both sentences against the
// initial encoder outputs.
double regularization_loss(const Matrix& current_source, const Matrix& initial_source,
                           const Matrix& current_target, const Matrix& initial_target);

// Sum over the batch of alignment loss on word-pooled vectors plus drift on
// token vectors, both taken at align_layer. Pairs whose subword length
// exceeds max_seq_len are skipped.
double total_objective(const encoder::EncoderParams& params,
                       const encoder::ParamsSnapshot& initial, const corpus::Vocabulary& vocab,
                       const std::vector<AlignedPair>& batch, int align_layer,
                       double lambda = 1.0);

// Objective value plus exact reverse-mode parameter gradients for one batch.
std::pair<double, encoder::EncoderParams> objective_with_grads(
    const encoder::EncoderParams& params, const encoder::ParamsSnapshot& initial,
    const corpus::Vocabulary& vocab, const std::vector<AlignedPair>& batch, int align_layer,
    double lambda = 1.0);

struct TrainResult {
  encoder::EncoderParams params;
  encoder::ParamsSnapshot initial;     // taken before the first update
  std::vector<double> epoch_objective; // mean per-pair objective per epoch
  std::size_t pairs_skipped = 0;       // dropped for exceeding max_seq_len
};

TrainResult train_alignment(encoder::EncoderParams params, const corpus::Vocabulary& vocab,
                            const std::vector<AlignedCorpus>& corpora,
                            const AlignTrainConfig& config);

struct PairDistanceReport {
  std::optional<double> mean_aligned_distance;  // absent when no links exist
  std::optional<double> mean_random_distance;   // over unaligned word pairs
  double mean_drift = 0.0;                      // per-token distance from the snapshot
  std::size_t pairs_used = 0;
  std::size_t links_used = 0;
};

PairDistanceReport pair_distance_report(const encoder::EncoderParams& params,
                                        const encoder::ParamsSnapshot& initial,
                                        const corpus::Vocabulary& vocab,
                                        const std::vector<AlignedPair>& pairs, int align_layer,
                                        std::uint64_t seed);

std::vector<AlignedPair> flatten_corpora(const std::vector<AlignedCorpus>& corpora);

}  // namespace xlqa::alignft

#endif  // XLQA_ALIGNFT_HPP
