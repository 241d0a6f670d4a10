#include "support/synth.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "xlqa/rng.hpp"

namespace xlqa::testing {

namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

char cipher_char(char c) {
  const std::string cons = kConsonants;
  const std::string vows = kVowels;
  if (auto pos = cons.find(c); pos != std::string::npos) {
    return cons[(pos + 7) % cons.size()];
  }
  if (auto pos = vows.find(c); pos != std::string::npos) {
    return vows[(pos + 2) % vows.size()];
  }
  return c;
}

char decipher_char(char c) {
  const std::string cons = kConsonants;
  const std::string vows = kVowels;
  if (auto pos = cons.find(c); pos != std::string::npos) {
    return cons[(pos + cons.size() - 7) % cons.size()];
  }
  if (auto pos = vows.find(c); pos != std::string::npos) {
    return vows[(pos + vows.size() - 2) % vows.size()];
  }
  return c;
}

std::string make_word(Rng& rng) {
  const std::string cons = kConsonants;
  const std::string vows = kVowels;
  std::string w;
  const int syllables = 2 + rng.index(2);
  for (int s = 0; s < syllables; ++s) {
    w.push_back(cons[rng.index(cons.size())]);
    w.push_back(vows[rng.index(vows.size())]);
  }
  return w;
}

}  // namespace

CipherWorld::CipherWorld(int lexicon_size, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::string> seen;
  while (static_cast<int>(lexicon_.size()) < lexicon_size) {
    std::string w = make_word(rng);
    std::string c = w;
    for (char& ch : c) ch = cipher_char(ch);
    // Source and cipher forms must all be distinct tokens.
    if (seen.count(w) || seen.count(c) || w == c) continue;
    seen.insert(w);
    seen.insert(c);
    lexicon_.push_back(std::move(w));
  }
  question_words_ = {"kedi", "punolo"};
  for (const auto& qw : question_words_) {
    if (seen.count(qw)) throw std::logic_error("question word collides with lexicon");
  }
}

std::string CipherWorld::cipher_word(const std::string& word) const {
  std::string out = word;
  for (char& c : out) c = cipher_char(c);
  return out;
}

std::string CipherWorld::decipher_word(const std::string& word) const {
  std::string out = word;
  for (char& c : out) c = decipher_char(c);
  return out;
}

std::string CipherWorld::translate(const std::string& text, const std::string& from_lang,
                                   const std::string& to_lang) const {
  if (from_lang == to_lang) return text;
  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    out += to_lang == kTargetLang ? cipher_word(word) : decipher_word(word);
    word.clear();
  };
  for (const char c : text) {
    if (c == ' ') {
      flush();
      out.push_back(c);
    } else {
      word.push_back(c);
    }
  }
  flush();
  return out;
}

std::string CipherWorld::word_in(const std::string& word, const std::string& lang) const {
  return lang == kTargetLang ? cipher_word(word) : word;
}

corpus::ParallelCorpus CipherWorld::make_bitext(int pairs, int min_len, int max_len,
                                                std::uint64_t seed) const {
  Rng rng(seed);
  corpus::ParallelCorpus out;
  out.source_lang = kSourceLang;
  out.target_lang = kTargetLang;
  for (int i = 0; i < pairs; ++i) {
    const int len = min_len + rng.index(static_cast<std::size_t>(max_len - min_len + 1));
    std::string src;
    for (int k = 0; k < len; ++k) {
      if (k > 0) src += ' ';
      src += lexicon_[rng.index(lexicon_.size())];
    }
    const std::string tgt = translate(src, kSourceLang, kTargetLang);
    out.pairs.emplace_back(corpus::make_sentence(kSourceLang, src),
                           corpus::make_sentence(kTargetLang, tgt));
  }
  return out;
}

std::vector<aligner::AlignmentSet> CipherWorld::identity_alignments(
    const corpus::ParallelCorpus& bitext) const {
  std::vector<aligner::AlignmentSet> out;
  out.reserve(bitext.pairs.size());
  for (const auto& [src, tgt] : bitext.pairs) {
    aligner::AlignmentSet set;
    const int n = static_cast<int>(std::min(src.tokens.size(), tgt.tokens.size()));
    for (int i = 0; i < n; ++i) set.add({i, i});
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<corpus::QAExample> CipherWorld::make_qa(const QAOptions& options) const {
  Rng rng(options.seed);
  std::vector<corpus::QAExample> out;
  for (int i = 0; i < options.count; ++i) {
    const std::string topic = lexicon_[rng.index(lexicon_.size())];
    const bool answerable = rng.uniform() >= options.null_fraction;
    const int gold = answerable ? rng.index(static_cast<std::size_t>(options.passages)) : -1;

    corpus::QAExample ex;
    ex.id = options.id_prefix + std::to_string(i);
    ex.question_lang = options.question_lang;
    ex.context_lang = options.context_lang;
    ex.question = word_in(question_words_[0], options.question_lang) + " " +
                  word_in(topic, options.question_lang) + " " +
                  word_in(question_words_[1], options.question_lang) + "?";

    std::size_t span_start = 0, span_end = 0;
    for (int p = 0; p < options.passages; ++p) {
      std::vector<std::string> words;
      const int len = 4 + rng.index(3);
      for (int k = 0; k < len; ++k) {
        std::string w = lexicon_[rng.index(lexicon_.size())];
        while (w == topic) w = lexicon_[rng.index(lexicon_.size())];
        words.push_back(word_in(w, options.context_lang));
      }
      if (p == gold) {
        words[static_cast<std::size_t>(rng.index(words.size()))] =
            word_in(topic, options.context_lang);
      }
      if (p > 0) ex.context += '\n';
      const std::size_t pstart = ex.context.size();
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (k > 0) ex.context += ' ';
        if (p == gold && words[k] == word_in(topic, options.context_lang)) {
          span_start = ex.context.size();
          span_end = span_start + words[k].size();
        }
        ex.context += words[k];
      }
      ex.passages.emplace_back(pstart, ex.context.size());
    }
    if (answerable) {
      ex.gold_passage = gold;
      ex.gold_minimal = {corpus::MinimalAnswer::Kind::Span, span_start, span_end};
    }
    corpus::validate_example(ex);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<corpus::Translation> CipherWorld::question_translations(
    const std::vector<corpus::QAExample>& examples, const std::string& to_lang) const {
  std::vector<corpus::Translation> out;
  for (const auto& ex : examples) {
    if (ex.question_lang == to_lang) continue;
    corpus::Translation t;
    t.id = ex.id;
    t.lang = to_lang;
    t.question = translate(ex.question, ex.question_lang, to_lang);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace xlqa::testing
