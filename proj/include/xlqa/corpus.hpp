#ifndef XLQA_CORPUS_HPP
#define XLQA_CORPUS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xlqa::corpus {

// A whitespace/punctuation-delimited word with byte offsets into the text it
// was cut from. subword_ids stays empty until encode_subwords is applied.
struct WordToken {
  std::string surface;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;  // exclusive
  std::vector<int> subword_ids;
};

struct Sentence {
  std::string language;  // ISO 639 code
  std::string raw_text;
  std::vector<WordToken> tokens;
};

struct ParallelCorpus {
  std::string source_lang;
  std::string target_lang;
  std::vector<std::pair<Sentence, Sentence>> pairs;
};

// Splits on Unicode whitespace, then detaches leading/trailing punctuation
// characters into their own tokens. Offsets slice the input exactly.
std::vector<WordToken> tokenize(std::string_view text);

Sentence make_sentence(std::string language, std::string text);

// Byte-level BPE vocabulary. Ids are laid out as: 4 specials, 256 byte
// units, then one id per merge in learned order. Any UTF-8 string encodes
// without failure via the byte units.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kByteBase = 4;

  Vocabulary();
  static Vocabulary from_merges(std::vector<std::pair<std::string, std::string>> merges);

  int size() const { return static_cast<int>(tokens_.size()); }
  // -1 when the token string is not in the vocabulary.
  int id_of(std::string_view token) const;
  const std::string& token_of(int id) const;
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

  // Applies merges in learned order to the word's bytes. Never fails.
  std::vector<int> encode_word(std::string_view word) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void add_token(std::string tok);
  std::vector<std::string> tokens_;                        // id -> token bytes
  std::vector<std::pair<std::string, std::string>> merges_;
  // token bytes -> id; ordered map keeps behavior deterministic
  std::vector<std::pair<std::string, int>> index_;  // sorted by token
  void rebuild_index();
};

// Greedy frequency BPE over every sentence of every corpus; ties broken by
// lexicographically smallest (left, right) pair.
Vocabulary build_vocab(const std::vector<ParallelCorpus>& corpora, int merge_count);

// Returns a copy of the token with subword_ids filled in.
WordToken encode_subwords(const Vocabulary& vocab, const WordToken& token);
Sentence encode_sentence(const Vocabulary& vocab, Sentence sentence);

// Concatenated subword ids of an encoded sentence plus the [start,end)
// subword index range of each word.
std::pair<std::vector<int>, std::vector<std::pair<int, int>>> flatten_subwords(
    const Sentence& sentence);

// Line-aligned bitext; blank-blank lines are dropped, a blank on only one
// side is a format error.
ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path,
                             const std::string& src_lang, const std::string& tgt_lang);

struct MinimalAnswer {
  enum class Kind { Span, Yes, No, Null };
  Kind kind = Kind::Null;
  std::size_t span_start = 0;
  std::size_t span_end = 0;  // exclusive, bytes into the context document

  bool operator==(const MinimalAnswer&) const = default;
};

struct QAExample {
  std::string id;
  std::string question_lang;
  std::string context_lang;
  std::string question;
  std::string context;
  std::vector<std::pair<std::size_t, std::size_t>> passages;  // byte ranges into context
  std::optional<int> gold_passage;
  MinimalAnswer gold_minimal;
};

// Checks the QAExample invariants; throws format_error naming id and field.
void validate_example(const QAExample& ex);

std::vector<QAExample> load_qa_dataset(const std::string& path);
void save_qa_dataset(const std::vector<QAExample>& examples, const std::string& path);

struct Translation {
  std::string id;
  std::string lang;
  std::string question;
};

std::vector<Translation> load_translations(const std::string& path);
void save_translations(const std::vector<Translation>& translations, const std::string& path);

// Originals first, then one augmented copy per matched translation with the
// question swapped, question_lang replaced and id suffixed "#aug-<lang>".
// Unmatched translation ids are skipped (reported via `warnings`).
std::vector<QAExample> augment_crosslingual(const std::vector<QAExample>& examples,
                                            const std::vector<Translation>& translations,
                                            std::vector<std::string>* warnings = nullptr);

}  // namespace xlqa::corpus

#endif  // XLQA_CORPUS_HPP
