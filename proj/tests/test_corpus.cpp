#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "support/tempdir.hpp"
#include "xlqa/corpus.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

using namespace xlqa;
using namespace xlqa::corpus;
using xlqa::testing::TempDir;
using xlqa::testing::write_file;

namespace {

ParallelCorpus tiny_corpus(const std::vector<std::pair<std::string, std::string>>& pairs) {
  ParallelCorpus c;
  c.source_lang = "en";
  c.target_lang = "xx";
  for (const auto& [s, t] : pairs) {
    c.pairs.emplace_back(make_sentence("en", s), make_sentence("xx", t));
  }
  return c;
}

QAExample simple_example(const std::string& id) {
  QAExample ex;
  ex.id = id;
  ex.question_lang = "en";
  ex.context_lang = "en";
  ex.question = "Where did Joan Clarke work?";
  ex.context = "Joan Clarke worked at Bletchley Park. She was a cryptanalyst.";
  ex.passages = {{0, 37}, {38, 61}};
  ex.gold_passage = 0;
  ex.gold_minimal = {MinimalAnswer::Kind::Span, 22, 36};
  validate_example(ex);
  return ex;
}

}  // namespace

TEST_CASE("tokenize: empty input") { CHECK(tokenize("").empty()); }

TEST_CASE("tokenize: whitespace split with trailing punctuation detached") {
  const auto toks = tokenize("Where did Joan Clarke work?");
  REQUIRE(toks.size() == 6);
  CHECK(toks[0].surface == "Where");
  CHECK(toks[4].surface == "work");
  CHECK(toks[5].surface == "?");
  CHECK(toks[5].byte_start == 26);
  CHECK(toks[5].byte_end == 27);
}

TEST_CASE("tokenize: multi-byte offsets via UTF-8 byte counting") {
  // "কোথায় কাজ": first word is 6 three-byte codepoints = 18 bytes,
  // second starts after the single-byte space.
  const std::string text =
      "\xe0\xa6\x95\xe0\xa7\x8b\xe0\xa6\xa5\xe0\xa6\xbe\xe0\xa6\xaf\xe0\xa6\xbc"
      " "
      "\xe0\xa6\x95\xe0\xa6\xbe\xe0\xa6\x9c";
  const auto toks = tokenize(text);
  REQUIRE(toks.size() == 2);
  CHECK(toks[0].byte_start == 0);
  CHECK(toks[0].byte_end == 18);
  CHECK(toks[1].byte_start == 19);
  CHECK(toks[1].byte_end == 28);
}

TEST_CASE("tokenize: leading and trailing punctuation become separate tokens") {
  const auto toks = tokenize("(abc)! x");
  REQUIRE(toks.size() == 5);
  CHECK(toks[0].surface == "(");
  CHECK(toks[1].surface == "abc");
  CHECK(toks[2].surface == ")");
  CHECK(toks[3].surface == "!");
  CHECK(toks[4].surface == "x");
}

TEST_CASE("tokenize: invalid UTF-8 is an input error") {
  CHECK_THROWS_AS(tokenize("abc \xff def"), input_error);
  CHECK_THROWS_AS(tokenize("\xe0\xa6"), input_error);  // truncated sequence
}

TEST_CASE("tokenize: slicing raw text at token offsets reproduces every surface") {
  Rng rng(2024);
  const std::vector<std::string> pieces = {"a",  "bc",  "\xe0\xa6\x95", ",", "?",
                                           " ",  "\t",  "  ",           "!", "word",
                                           "\xc3\xa9", "\xf0\x9f\x98\x80", ".", "x1"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int n = rng.index(12);
    for (int i = 0; i < n; ++i) text += pieces[rng.index(pieces.size())];
    const auto toks = tokenize(text);
    for (const auto& t : toks) {
      CHECK(t.byte_start < t.byte_end);
      CHECK(text.substr(t.byte_start, t.byte_end - t.byte_start) == t.surface);
    }
    for (std::size_t i = 1; i < toks.size(); ++i) {
      CHECK(toks[i - 1].byte_end <= toks[i].byte_start);
    }
  }
}

TEST_CASE("build_vocab: zero merges leaves byte units plus specials") {
  const auto vocab = build_vocab({tiny_corpus({{"ab", "cd"}})}, 0);
  CHECK(vocab.size() == 260);
  CHECK(vocab.merges().empty());
  // id_map is a bijection onto 0..|V|-1
  for (int id = 0; id < vocab.size(); ++id) {
    CHECK(vocab.id_of(vocab.token_of(id)) == id);
  }
}

TEST_CASE("build_vocab: first merge follows greedy frequency") {
  const auto vocab = build_vocab({tiny_corpus({{"aa aa", "aa aa"}})}, 1);
  REQUIRE(vocab.merges().size() == 1);
  CHECK(vocab.merges()[0] == std::pair<std::string, std::string>{"a", "a"});
}

TEST_CASE("build_vocab: deterministic across runs") {
  const auto corpus = tiny_corpus({{"the cat sat", "le chat"}, {"the dog", "le chien"}});
  const auto a = build_vocab({corpus}, 12);
  const auto b = build_vocab({corpus}, 12);
  CHECK(a.merges() == b.merges());
  CHECK(a.encode_word("chat") == b.encode_word("chat"));
}

TEST_CASE("encode_subwords: whole-word vocabulary entry yields one id") {
  const auto vocab = build_vocab({tiny_corpus({{"aa aa", "aa aa"}})}, 1);
  WordToken tok{"aa", 0, 2, {}};
  const auto enc = encode_subwords(vocab, tok);
  REQUIRE(enc.subword_ids.size() == 1);
  CHECK(vocab.token_of(enc.subword_ids[0]) == "aa");
}

TEST_CASE("encode_subwords: no merges forces byte units") {
  const auto vocab = build_vocab({tiny_corpus({{"ab", "ab"}})}, 0);
  WordToken tok{"ab", 0, 2, {}};
  const auto enc = encode_subwords(vocab, tok);
  REQUIRE(enc.subword_ids.size() == 2);
  CHECK(vocab.token_of(enc.subword_ids[0]) == "a");
  CHECK(vocab.token_of(enc.subword_ids[1]) == "b");
}

TEST_CASE("encode_subwords: merges apply in learned order") {
  const auto vocab = Vocabulary::from_merges({{"a", "a"}});
  const auto ids = vocab.encode_word("aab");
  REQUIRE(ids.size() == 2);
  CHECK(vocab.token_of(ids[0]) == "aa");
  CHECK(vocab.token_of(ids[1]) == "b");
}

TEST_CASE("vocabulary totality: any byte string encodes to >= 1 id") {
  const auto vocab = build_vocab({tiny_corpus({{"hello world", "hallo welt"}})}, 8);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string junk;
    const int n = 1 + rng.index(12);
    for (int i = 0; i < n; ++i) junk.push_back(static_cast<char>(rng.below(256)));
    const auto ids = vocab.encode_word(junk);
    CHECK(ids.size() >= 1);
    std::string rebuilt;
    for (const int id : ids) rebuilt += vocab.token_of(id);
    CHECK(rebuilt == junk);
  }
}

TEST_CASE("vocabulary save/load round trip") {
  TempDir dir;
  const auto vocab = build_vocab({tiny_corpus({{"abc abd", "xyz"}})}, 6);
  vocab.save(dir.file("vocab.json"));
  const auto loaded = Vocabulary::load(dir.file("vocab.json"));
  CHECK(loaded.merges() == vocab.merges());
  CHECK(loaded.encode_word("abc") == vocab.encode_word("abc"));
  CHECK(loaded.size() == vocab.size());
}

TEST_CASE("load_parallel: line-aligned pairs") {
  TempDir dir;
  write_file(dir.file("src.txt"), "a b\nc d\ne f\n");
  write_file(dir.file("tgt.txt"), "x y\nz w\nu v\n");
  const auto corpus = load_parallel(dir.file("src.txt"), dir.file("tgt.txt"), "en", "xx");
  REQUIRE(corpus.pairs.size() == 3);
  CHECK(corpus.pairs[1].first.raw_text == "c d");
  CHECK(corpus.pairs[1].second.language == "xx");
}

TEST_CASE("load_parallel: line count mismatch names both counts") {
  TempDir dir;
  write_file(dir.file("src.txt"), "a\nb\nc\n");
  write_file(dir.file("tgt.txt"), "x\ny\nz\nw\n");
  try {
    load_parallel(dir.file("src.txt"), dir.file("tgt.txt"), "en", "xx");
    FAIL("expected format_error");
  } catch (const format_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("4") != std::string::npos);
  }
}

TEST_CASE("load_parallel: blank-blank lines dropped, blank-one-side rejected") {
  TempDir dir;
  write_file(dir.file("src.txt"), "a\nb\n\nc\nd\n");
  write_file(dir.file("tgt.txt"), "p\nq\n\nr\ns\n");
  CHECK(load_parallel(dir.file("src.txt"), dir.file("tgt.txt"), "en", "xx").pairs.size() == 4);

  write_file(dir.file("bad.txt"), "p\nq\nr\nr2\ns\n");
  CHECK_THROWS_AS(load_parallel(dir.file("src.txt"), dir.file("bad.txt"), "en", "xx"),
                  format_error);
}

TEST_CASE("load_qa_dataset: empty file gives empty sequence") {
  TempDir dir;
  write_file(dir.file("data.jsonl"), "");
  CHECK(load_qa_dataset(dir.file("data.jsonl")).empty());
}

TEST_CASE("load_qa_dataset: span outside gold passage is a validation error") {
  TempDir dir;
  write_file(dir.file("data.jsonl"),
             R"({"id":"q1","question_lang":"en","context_lang":"en","question":"?",)"
             R"("context":"abcdef","passages":[[0,3],[3,6]],"gold_passage":0,)"
             R"("gold_minimal":{"span":[4,5]}})"
             "\n");
  CHECK_THROWS_AS(load_qa_dataset(dir.file("data.jsonl")), format_error);
}

TEST_CASE("load_qa_dataset: offsets of a valid fixture match hand-counted bytes") {
  TempDir dir;
  const auto ex = simple_example("q1");
  auto ex2 = simple_example("q2");
  ex2.gold_passage = std::nullopt;
  ex2.gold_minimal = {};
  save_qa_dataset({ex, ex2}, dir.file("data.jsonl"));
  const auto loaded = load_qa_dataset(dir.file("data.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].passages[0] == std::pair<std::size_t, std::size_t>{0, 37});
  CHECK(loaded[0].gold_minimal.span_start == 22);
  CHECK(loaded[0].context.substr(22, 14) == "Bletchley Park");
  CHECK(!loaded[1].gold_passage.has_value());
  CHECK(loaded[1].gold_minimal.kind == MinimalAnswer::Kind::Null);
}

TEST_CASE("augment: empty translations map returns the input unchanged") {
  const std::vector<QAExample> input = {simple_example("q1")};
  const auto out = augment_crosslingual(input, {});
  REQUIRE(out.size() == 1);
  CHECK(out[0].id == "q1");
}

TEST_CASE("augment: translated question swaps language, context bytes stay identical") {
  const std::vector<QAExample> input = {simple_example("q1")};
  Translation t;
  t.id = "q1";
  t.lang = "bn";
  t.question =
      "Joane Clarke \xe0\xa6\x95\xe0\xa7\x8b\xe0\xa6\xa5\xe0\xa6\xbe\xe0\xa6\xaf\xe0\xa6\xbc"
      " \xe0\xa6\x95\xe0\xa6\xbe\xe0\xa6\x9c \xe0\xa6\x95\xe0\xa6\xb0\xe0\xa6\xa4?";
  const auto out = augment_crosslingual(input, {t});
  REQUIRE(out.size() == 2);
  CHECK(out[1].id == "q1#aug-bn");
  CHECK(out[1].question_lang == "bn");
  CHECK(out[1].question == t.question);
  CHECK(out[1].context == input[0].context);
  CHECK(out[1].gold_passage == input[0].gold_passage);
  CHECK(out[1].gold_minimal == input[0].gold_minimal);
}

TEST_CASE("augment: three examples with two matched translations give five") {
  const std::vector<QAExample> input = {simple_example("a"), simple_example("b"),
                                        simple_example("c")};
  std::vector<Translation> ts = {{"a", "bn", "Q-bn"}, {"c", "ko", "Q-ko"}};
  const auto out = augment_crosslingual(input, ts);
  CHECK(out.size() == 5);
  CHECK(out[3].id == "a#aug-bn");
  CHECK(out[4].id == "c#aug-ko");
}

TEST_CASE("augment: unmatched id warns and is skipped") {
  const std::vector<QAExample> input = {simple_example("a")};
  std::vector<std::string> warnings;
  const auto out = augment_crosslingual(input, {{"zz", "bn", "Q"}}, &warnings);
  CHECK(out.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("zz") != std::string::npos);
}

TEST_CASE("augment: translation in the context language is a validation error") {
  const std::vector<QAExample> input = {simple_example("a")};
  CHECK_THROWS_AS(augment_crosslingual(input, {{"a", "en", "Q"}}), input_error);
}

TEST_CASE("augment invariants on random fixtures") {
  Rng rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<QAExample> input;
    const int n = 1 + rng.index(6);
    for (int i = 0; i < n; ++i) input.push_back(simple_example("ex" + std::to_string(i)));
    std::vector<Translation> ts;
    std::size_t matched = 0;
    const int m = rng.index(8);
    for (int i = 0; i < m; ++i) {
      const bool match = rng.uniform() < 0.7;
      Translation t;
      t.id = match ? "ex" + std::to_string(rng.index(static_cast<std::size_t>(n))) : "missing";
      t.lang = rng.uniform() < 0.5 ? "bn" : "sw";
      t.question = "Q" + std::to_string(i);
      if (match) ++matched;
      ts.push_back(std::move(t));
    }
    const auto out = augment_crosslingual(input, ts);
    CHECK(out.size() == input.size() + matched);
    for (std::size_t i = input.size(); i < out.size(); ++i) {
      const auto src_id = out[i].id.substr(0, out[i].id.find("#aug-"));
      const auto src = std::find_if(input.begin(), input.end(),
                                    [&](const QAExample& e) { return e.id == src_id; });
      REQUIRE(src != input.end());
      CHECK(out[i].context == src->context);
      CHECK(out[i].gold_passage == src->gold_passage);
      CHECK(out[i].gold_minimal == src->gold_minimal);
    }
  }
}

TEST_CASE("flatten_subwords: ids concatenate in word order") {
  const auto vocab = build_vocab({tiny_corpus({{"ab cd", "ab cd"}})}, 0);
  const auto sent = encode_sentence(vocab, make_sentence("en", "ab cd"));
  const auto [ids, ranges] = flatten_subwords(sent);
  REQUIRE(ids.size() == 4);
  REQUIRE(ranges.size() == 2);
  CHECK(ranges[0] == std::pair<int, int>{0, 2});
  CHECK(ranges[1] == std::pair<int, int>{2, 4});
}

TEST_CASE("load_parallel: a bitext with no usable pairs is a format error") {
  TempDir dir;
  write_file(dir.file("src.txt"), "\n\n");
  write_file(dir.file("tgt.txt"), "\n\n");
  CHECK_THROWS_AS(load_parallel(dir.file("src.txt"), dir.file("tgt.txt"), "en", "xx"),
                  format_error);
}
