#ifndef XLQA_ALIGNER_HPP
#define XLQA_ALIGNER_HPP

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlqa/corpus.hpp"

namespace xlqa::aligner {

struct AlignmentLink {
  int p = 0;  // source word index
  int q = 0;  // target word index
  auto operator<=>(const AlignmentLink&) const = default;
};

// Duplicate-free link set for one sentence pair, kept sorted.
struct AlignmentSet {
  std::vector<AlignmentLink> links;

  void add(AlignmentLink link);
  bool contains(AlignmentLink link) const;
  bool operator==(const AlignmentSet&) const = default;
};

// Lexical translation probabilities t(target | source) with a distinguished
// NULL source word. Per-source distributions sum to 1 after training.
class TranslationTable {
 public:
  static constexpr std::string_view kNullWord = "<NULL>";

  // 0 for pairs never seen together.
  double prob(std::string_view source, std::string_view target) const;
  void set_prob(std::string_view source, std::string_view target, double p);
  bool has_source(std::string_view source) const;
  bool has_null() const { return has_source(kNullWord); }

  std::vector<std::string> source_words() const;  // sorted, includes NULL if present
  // (target, prob) entries for one source word, sorted by target.
  std::vector<std::pair<std::string, double>> row(std::string_view source) const;

  // TSV `source<TAB>target<TAB>prob`, sorted lexicographically.
  void save_tsv(const std::string& path) const;
  static TranslationTable load_tsv(const std::string& path);

 private:
  int intern(std::string_view word);
  int find(std::string_view word) const;
  std::vector<std::string> words_;                       // id -> surface
  std::vector<std::pair<std::string, int>> index_;       // sorted surface -> id
  std::vector<std::vector<std::pair<int, double>>> rows_;  // per source id, sorted by target id
};

struct Ibm1Result {
  TranslationTable table;
  std::vector<double> log_likelihood;  // one entry per EM iteration, non-decreasing
};

// IBM Model 1 EM over word surfaces: uniform init over co-occurring pairs,
// per-target posterior E-step, count-normalizing M-step. Deterministic.
Ibm1Result train_ibm1(const corpus::ParallelCorpus& corpus, int iterations, bool use_null = true);

// threshold == nullopt selects argmax mode: one link per target word unless
// NULL wins; ties go to the lowest source index. Threshold mode keeps every
// link whose normalized posterior reaches the threshold.
AlignmentSet extract_alignments(const TranslationTable& table, const corpus::Sentence& source,
                                const corpus::Sentence& target,
                                std::optional<double> threshold = std::nullopt);

// Intersection; `reverse` must already be transposed into source-target order.
AlignmentSet symmetrize(const AlignmentSet& forward, const AlignmentSet& reverse);

// Pharaoh format: one line per sentence pair of space-separated `p-q` tokens.
std::vector<AlignmentSet> read_pharaoh(const std::string& path);
void write_pharaoh(const std::vector<AlignmentSet>& sets, const std::string& path);

}  // namespace xlqa::aligner

#endif  // XLQA_ALIGNER_HPP
