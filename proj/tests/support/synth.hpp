#ifndef XLQA_TESTS_SYNTH_HPP
#define XLQA_TESTS_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xlqa/aligner.hpp"
#include "xlqa/corpus.hpp"

namespace xlqa::testing {

// A two-language toy world where the "target language" is a deterministic
// token-wise letter-substitution cipher of the source. Gold alignments are
// the identity and question translation is exact.
class CipherWorld {
 public:
  static constexpr const char* kSourceLang = "aa";
  static constexpr const char* kTargetLang = "bb";

  CipherWorld(int lexicon_size, std::uint64_t seed);

  const std::vector<std::string>& lexicon() const { return lexicon_; }
  std::string cipher_word(const std::string& word) const;
  std::string decipher_word(const std::string& word) const;
  // Word-wise translation between the two language codes.
  std::string translate(const std::string& text, const std::string& from_lang,
                        const std::string& to_lang) const;

  corpus::ParallelCorpus make_bitext(int pairs, int min_len, int max_len,
                                     std::uint64_t seed) const;
  std::vector<aligner::AlignmentSet> identity_alignments(
      const corpus::ParallelCorpus& bitext) const;

  struct QAOptions {
    int count = 100;
    std::string question_lang = kSourceLang;
    std::string context_lang = kSourceLang;
    std::string id_prefix = "ex";
    double null_fraction = 0.15;
    int passages = 3;
    std::uint64_t seed = 1;
  };

  // Keyword-lookup QA: the question names a topic word; the gold passage is
  // the unique passage containing it and the gold span is that occurrence.
  std::vector<corpus::QAExample> make_qa(const QAOptions& options) const;

  // One translation record per example, moving the question into `to_lang`.
  std::vector<corpus::Translation> question_translations(
      const std::vector<corpus::QAExample>& examples, const std::string& to_lang) const;

 private:
  std::string word_in(const std::string& word, const std::string& lang) const;
  std::vector<std::string> lexicon_;
  std::vector<std::string> question_words_;
};

}  // namespace xlqa::testing

#endif  // XLQA_TESTS_SYNTH_HPP
