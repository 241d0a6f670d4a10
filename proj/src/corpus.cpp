#include "xlqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "xlqa/errors.hpp"
#include "xlqa/utf8.hpp"

namespace xlqa::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto d = utf8::decode(line, pos);
    if (d.len == 0) return false;  // malformed bytes are not blank
    if (!utf8::is_space(d.cp)) return false;
    pos += d.len;
  }
  return true;
}

std::string hex_encode(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const unsigned char b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

std::string hex_decode(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw format_error("odd-length hex token in vocabulary file");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw format_error("invalid hex token in vocabulary file");
    out.push_back(static_cast<char>((hi << 4) | lo));
  }
  return out;
}

}  // namespace

std::vector<WordToken> tokenize(std::string_view text) {
  if (!utf8::valid(text)) throw input_error("tokenize: input is not valid UTF-8");

  std::vector<WordToken> out;
  auto emit = [&](std::size_t start, std::size_t end) {
    WordToken tok;
    tok.surface = std::string(text.substr(start, end - start));
    tok.byte_start = start;
    tok.byte_end = end;
    out.push_back(std::move(tok));
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto d = utf8::decode(text, pos);
    if (utf8::is_space(d.cp)) {
      pos += d.len;
      continue;
    }
    // Collect one whitespace-free chunk as (byte offset, length) per char.
    const std::size_t chunk_start = pos;
    std::vector<std::pair<std::size_t, int>> chars;
    std::vector<char32_t> cps;
    while (pos < text.size()) {
      d = utf8::decode(text, pos);
      if (utf8::is_space(d.cp)) break;
      chars.emplace_back(pos, d.len);
      cps.push_back(d.cp);
      pos += d.len;
    }
    (void)chunk_start;
    std::size_t lo = 0, hi = chars.size();
    while (lo < hi && utf8::is_punct(cps[lo])) {
      emit(chars[lo].first, chars[lo].first + chars[lo].second);
      ++lo;
    }
    std::size_t core_hi = hi;
    while (core_hi > lo && utf8::is_punct(cps[core_hi - 1])) --core_hi;
    if (core_hi > lo) {
      emit(chars[lo].first, chars[core_hi - 1].first + chars[core_hi - 1].second);
    }
    for (std::size_t i = core_hi; i < hi; ++i) {
      emit(chars[i].first, chars[i].first + chars[i].second);
    }
  }
  return out;
}

Sentence make_sentence(std::string language, std::string text) {
  Sentence s;
  s.language = std::move(language);
  s.tokens = tokenize(text);
  s.raw_text = std::move(text);
  return s;
}

Vocabulary::Vocabulary() {
  tokens_ = {"<PAD>", "<UNK>", "<CLS>", "<SEP>"};
  for (int b = 0; b < 256; ++b) tokens_.push_back(std::string(1, static_cast<char>(b)));
  rebuild_index();
}

void Vocabulary::add_token(std::string tok) {
  tokens_.push_back(std::move(tok));
}

void Vocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(tokens_.size());
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) index_.emplace_back(tokens_[i], i);
  std::sort(index_.begin(), index_.end());
}

Vocabulary Vocabulary::from_merges(std::vector<std::pair<std::string, std::string>> merges) {
  Vocabulary v;
  for (const auto& [lhs, rhs] : merges) v.add_token(lhs + rhs);
  v.merges_ = std::move(merges);
  v.rebuild_index();
  return v;
}

int Vocabulary::id_of(std::string_view token) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), token,
                             [](const auto& entry, std::string_view t) { return entry.first < t; });
  if (it == index_.end() || it->first != token) return -1;
  return it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  if (id < 0 || id >= size()) throw contract_error("token_of: id out of range");
  return tokens_[id];
}

std::vector<int> Vocabulary::encode_word(std::string_view word) const {
  std::vector<std::string> units;
  units.reserve(word.size());
  for (const char c : word) units.emplace_back(1, c);
  for (const auto& [lhs, rhs] : merges_) {
    std::vector<std::string> next;
    next.reserve(units.size());
    std::size_t i = 0;
    while (i < units.size()) {
      if (i + 1 < units.size() && units[i] == lhs && units[i + 1] == rhs) {
        next.push_back(lhs + rhs);
        i += 2;
      } else {
        next.push_back(units[i]);
        ++i;
      }
    }
    units = std::move(next);
  }
  std::vector<int> ids;
  ids.reserve(units.size());
  for (const auto& u : units) {
    const int id = id_of(u);
    if (id < 0) throw contract_error("encode_word: unit missing from vocabulary");
    ids.push_back(id);
  }
  return ids;
}

void Vocabulary::save(const std::string& path) const {
  ordered_json j;
  j["format"] = "xlqa-vocab";
  j["version"] = 1;
  json merges = json::array();
  for (const auto& [lhs, rhs] : merges_) {
    merges.push_back({hex_encode(lhs), hex_encode(rhs)});
  }
  j["merges"] = std::move(merges);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write vocabulary file: " + path);
  out << j.dump(1, '\t') << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw format_error("vocabulary file " + path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != "xlqa-vocab") {
    throw format_error("vocabulary file " + path + ": missing xlqa-vocab marker");
  }
  std::vector<std::pair<std::string, std::string>> merges;
  for (const auto& m : j.at("merges")) {
    merges.emplace_back(hex_decode(m.at(0).get<std::string>()),
                        hex_decode(m.at(1).get<std::string>()));
  }
  return from_merges(std::move(merges));
}

Vocabulary build_vocab(const std::vector<ParallelCorpus>& corpora, int merge_count) {
  if (corpora.empty()) throw input_error("build_vocab: corpora list is empty");
  if (merge_count < 0) throw input_error("build_vocab: merge_count must be >= 0");

  // Word frequencies over both sides of every corpus; std::map keeps the
  // pair-count iteration order deterministic.
  std::map<std::string, long> word_freq;
  for (const auto& corpus : corpora) {
    for (const auto& [src, tgt] : corpus.pairs) {
      for (const auto& t : src.tokens) ++word_freq[t.surface];
      for (const auto& t : tgt.tokens) ++word_freq[t.surface];
    }
  }

  std::vector<std::pair<std::vector<std::string>, long>> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    std::vector<std::string> units;
    units.reserve(word.size());
    for (const char c : word) units.emplace_back(1, c);
    words.emplace_back(std::move(units), freq);
  }

  std::vector<std::pair<std::string, std::string>> merges;
  for (int step = 0; step < merge_count; ++step) {
    std::map<std::pair<std::string, std::string>, long> pair_freq;
    for (const auto& [units, freq] : words) {
      for (std::size_t i = 0; i + 1 < units.size(); ++i) {
        pair_freq[{units[i], units[i + 1]}] += freq;
      }
    }
    if (pair_freq.empty()) break;
    // Highest frequency wins; the map order hands ties to the
    // lexicographically smallest pair.
    auto best = pair_freq.begin();
    for (auto it = pair_freq.begin(); it != pair_freq.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto [lhs, rhs] = best->first;
    merges.emplace_back(lhs, rhs);
    for (auto& [units, freq] : words) {
      std::vector<std::string> next;
      next.reserve(units.size());
      std::size_t i = 0;
      while (i < units.size()) {
        if (i + 1 < units.size() && units[i] == lhs && units[i + 1] == rhs) {
          next.push_back(lhs + rhs);
          i += 2;
        } else {
          next.push_back(units[i]);
          ++i;
        }
      }
      units = std::move(next);
    }
  }
  return Vocabulary::from_merges(std::move(merges));
}

WordToken encode_subwords(const Vocabulary& vocab, const WordToken& token) {
  WordToken out = token;
  out.subword_ids = vocab.encode_word(token.surface);
  return out;
}

Sentence encode_sentence(const Vocabulary& vocab, Sentence sentence) {
  for (auto& tok : sentence.tokens) tok.subword_ids = vocab.encode_word(tok.surface);
  return sentence;
}

std::pair<std::vector<int>, std::vector<std::pair<int, int>>> flatten_subwords(
    const Sentence& sentence) {
  std::vector<int> ids;
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(sentence.tokens.size());
  for (const auto& tok : sentence.tokens) {
    if (tok.subword_ids.empty()) {
      throw contract_error("flatten_subwords: sentence is not subword-encoded");
    }
    const int start = static_cast<int>(ids.size());
    ids.insert(ids.end(), tok.subword_ids.begin(), tok.subword_ids.end());
    ranges.emplace_back(start, static_cast<int>(ids.size()));
  }
  return {std::move(ids), std::move(ranges)};
}

ParallelCorpus load_parallel(const std::string& src_path, const std::string& tgt_path,
                             const std::string& src_lang, const std::string& tgt_lang) {
  const auto src_lines = split_lines(read_file(src_path));
  const auto tgt_lines = split_lines(read_file(tgt_path));
  if (src_lines.size() != tgt_lines.size()) {
    throw format_error("bitext line count mismatch: " + src_path + " has " +
                       std::to_string(src_lines.size()) + " lines, " + tgt_path + " has " +
                       std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  corpus.source_lang = src_lang;
  corpus.target_lang = tgt_lang;
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    const auto line_no = std::to_string(i + 1);
    if (!utf8::valid(src_lines[i])) {
      throw input_error(src_path + ":" + line_no + ": invalid UTF-8");
    }
    if (!utf8::valid(tgt_lines[i])) {
      throw input_error(tgt_path + ":" + line_no + ": invalid UTF-8");
    }
    const bool src_blank = is_blank(src_lines[i]);
    const bool tgt_blank = is_blank(tgt_lines[i]);
    if (src_blank && tgt_blank) continue;
    if (src_blank != tgt_blank) {
      throw format_error("bitext line " + line_no + ": blank on one side only (" + src_path +
                         " / " + tgt_path + ")");
    }
    corpus.pairs.emplace_back(make_sentence(src_lang, src_lines[i]),
                              make_sentence(tgt_lang, tgt_lines[i]));
  }
  if (corpus.pairs.empty()) {
    throw format_error("bitext " + src_path + " / " + tgt_path + ": no sentence pairs");
  }
  return corpus;
}

void validate_example(const QAExample& ex) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw format_error("example '" + ex.id + "' field '" + field + "': " + why);
  };
  if (ex.id.empty()) fail("id", "must be non-empty");
  if (!utf8::valid(ex.question)) fail("question", "invalid UTF-8");
  if (!utf8::valid(ex.context)) fail("context", "invalid UTF-8");
  for (std::size_t i = 0; i < ex.passages.size(); ++i) {
    const auto [s, e] = ex.passages[i];
    const auto idx = std::to_string(i);
    if (s > e) fail("passages[" + idx + "]", "start exceeds end");
    if (e > ex.context.size()) fail("passages[" + idx + "]", "range outside context");
    if (!utf8::is_char_boundary(ex.context, s) || !utf8::is_char_boundary(ex.context, e)) {
      fail("passages[" + idx + "]", "byte offset not on a character boundary");
    }
  }
  if (ex.gold_passage) {
    const int gp = *ex.gold_passage;
    if (gp < 0 || gp >= static_cast<int>(ex.passages.size())) {
      fail("gold_passage", "does not index a passage");
    }
  }
  if (ex.gold_minimal.kind == MinimalAnswer::Kind::Span) {
    if (!ex.gold_passage) fail("gold_minimal", "span requires a gold passage");
    const auto [ps, pe] = ex.passages[*ex.gold_passage];
    const auto ss = ex.gold_minimal.span_start;
    const auto se = ex.gold_minimal.span_end;
    if (ss > se) fail("gold_minimal", "span start exceeds end");
    if (ss < ps || se > pe) fail("gold_minimal", "span outside the gold passage");
    if (!utf8::is_char_boundary(ex.context, ss) || !utf8::is_char_boundary(ex.context, se)) {
      fail("gold_minimal", "byte offset not on a character boundary");
    }
  }
}

namespace {

QAExample parse_example(const json& j, const std::string& where) {
  QAExample ex;
  try {
    ex.id = j.at("id").get<std::string>();
    ex.question_lang = j.at("question_lang").get<std::string>();
    ex.context_lang = j.at("context_lang").get<std::string>();
    ex.question = j.at("question").get<std::string>();
    ex.context = j.at("context").get<std::string>();
    for (const auto& p : j.at("passages")) {
      ex.passages.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
    }
    if (!j.at("gold_passage").is_null()) ex.gold_passage = j.at("gold_passage").get<int>();
    const auto& gm = j.at("gold_minimal");
    if (gm.is_null()) {
      ex.gold_minimal.kind = MinimalAnswer::Kind::Null;
    } else if (gm.contains("span")) {
      ex.gold_minimal.kind = MinimalAnswer::Kind::Span;
      ex.gold_minimal.span_start = gm.at("span").at(0).get<std::size_t>();
      ex.gold_minimal.span_end = gm.at("span").at(1).get<std::size_t>();
    } else if (gm.contains("yesno")) {
      const auto v = gm.at("yesno").get<std::string>();
      if (v == "YES") {
        ex.gold_minimal.kind = MinimalAnswer::Kind::Yes;
      } else if (v == "NO") {
        ex.gold_minimal.kind = MinimalAnswer::Kind::No;
      } else {
        throw format_error(where + ": gold_minimal.yesno must be YES or NO");
      }
    } else {
      throw format_error(where + ": gold_minimal must be a span, a yesno or null");
    }
  } catch (const json::exception& e) {
    throw format_error(where + ": " + e.what());
  }
  validate_example(ex);
  return ex;
}

json minimal_to_json(const MinimalAnswer& m) {
  switch (m.kind) {
    case MinimalAnswer::Kind::Span:
      return json{{"span", {m.span_start, m.span_end}}};
    case MinimalAnswer::Kind::Yes:
      return json{{"yesno", "YES"}};
    case MinimalAnswer::Kind::No:
      return json{{"yesno", "NO"}};
    case MinimalAnswer::Kind::Null:
      return json(nullptr);
  }
  return json(nullptr);
}

}  // namespace

std::vector<QAExample> load_qa_dataset(const std::string& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<QAExample> out;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw format_error(where + ": " + e.what());
    }
    QAExample ex = parse_example(j, where);
    if (auto [it, inserted] = seen.emplace(ex.id, i); !inserted) {
      throw format_error(where + ": duplicate example id '" + ex.id + "'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void save_qa_dataset(const std::vector<QAExample>& examples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write dataset file: " + path);
  for (const auto& ex : examples) {
    ordered_json j;
    j["id"] = ex.id;
    j["question_lang"] = ex.question_lang;
    j["context_lang"] = ex.context_lang;
    j["question"] = ex.question;
    j["context"] = ex.context;
    json passages = json::array();
    for (const auto& [s, e] : ex.passages) passages.push_back({s, e});
    j["passages"] = std::move(passages);
    if (ex.gold_passage) {
      j["gold_passage"] = *ex.gold_passage;
    } else {
      j["gold_passage"] = nullptr;
    }
    j["gold_minimal"] = minimal_to_json(ex.gold_minimal);
    out << j.dump() << "\n";
  }
}

std::vector<Translation> load_translations(const std::string& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<Translation> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ":" + std::to_string(i + 1);
    try {
      const json j = json::parse(lines[i]);
      Translation t;
      t.id = j.at("id").get<std::string>();
      t.lang = j.at("lang").get<std::string>();
      t.question = j.at("question").get<std::string>();
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw format_error(where + ": " + e.what());
    }
  }
  return out;
}

void save_translations(const std::vector<Translation>& translations, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write translations file: " + path);
  for (const auto& t : translations) {
    ordered_json j;
    j["id"] = t.id;
    j["lang"] = t.lang;
    j["question"] = t.question;
    out << j.dump() << "\n";
  }
}

std::vector<QAExample> augment_crosslingual(const std::vector<QAExample>& examples,
                                            const std::vector<Translation>& translations,
                                            std::vector<std::string>* warnings) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (auto [it, inserted] = by_id.emplace(examples[i].id, i); !inserted) {
      throw input_error("augment: duplicate example id '" + examples[i].id + "'");
    }
  }
  // Group matched translations by example, preserving translation order.
  std::vector<std::vector<const Translation*>> matched(examples.size());
  for (const auto& t : translations) {
    const auto it = by_id.find(t.id);
    if (it == by_id.end()) {
      if (warnings) warnings->push_back("translation id '" + t.id + "' has no matching example");
      continue;
    }
    const auto& ex = examples[it->second];
    if (t.lang == ex.context_lang) {
      throw input_error("augment: translation for '" + t.id + "' is in the context language '" +
                        t.lang + "'");
    }
    matched[it->second].push_back(&t);
  }
  std::vector<QAExample> out = examples;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const Translation* t : matched[i]) {
      QAExample aug = examples[i];
      aug.id += "#aug-" + t->lang;
      aug.question = t->question;
      aug.question_lang = t->lang;
      out.push_back(std::move(aug));
    }
  }
  return out;
}

}  // namespace xlqa::corpus
