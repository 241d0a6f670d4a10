#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support/tempdir.hpp"
#include "xlqa/aligner.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

using namespace xlqa;
using namespace xlqa::aligner;
using corpus::ParallelCorpus;
using corpus::make_sentence;
using xlqa::testing::TempDir;
using xlqa::testing::write_file;

namespace {

ParallelCorpus bitext(const std::vector<std::pair<std::string, std::string>>& pairs) {
  ParallelCorpus c;
  c.source_lang = "en";
  c.target_lang = "xx";
  for (const auto& [s, t] : pairs) {
    c.pairs.emplace_back(make_sentence("en", s), make_sentence("xx", t));
  }
  return c;
}

}  // namespace

TEST_CASE("train_ibm1: single co-occurrence forces probability 1") {
  const auto result = train_ibm1(bitext({{"a", "x"}}), 1, /*use_null=*/false);
  CHECK(result.table.prob("a", "x") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train_ibm1: toy two-pair corpus prefers the consistent pairing") {
  const auto result = train_ibm1(bitext({{"a b", "x y"}, {"a c", "x z"}}), 10, false);
  const auto row = result.table.row("a");
  REQUIRE(!row.empty());
  std::string best;
  double best_p = -1.0;
  for (const auto& [target, p] : row) {
    if (p > best_p) {
      best_p = p;
      best = target;
    }
  }
  CHECK(best == "x");
}

TEST_CASE("train_ibm1: log-likelihood trace never decreases") {
  const auto corpus = bitext({{"the cat", "le chat"},
                              {"the dog", "le chien"},
                              {"a cat", "un chat"},
                              {"the cat runs", "le chat court"}});
  for (const bool use_null : {false, true}) {
    const auto result = train_ibm1(corpus, 12, use_null);
    REQUIRE(result.log_likelihood.size() == 12);
    for (std::size_t i = 1; i < result.log_likelihood.size(); ++i) {
      CHECK(result.log_likelihood[i] >= result.log_likelihood[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("train_ibm1: every source distribution sums to 1 after the M-step") {
  const auto result =
      train_ibm1(bitext({{"w1 w2 w3", "v1 v2 v3"}, {"w2 w4", "v2 v4"}}), 5, true);
  for (const auto& source : result.table.source_words()) {
    double total = 0.0;
    for (const auto& [target, p] : result.table.row(source)) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("train_ibm1: identical runs produce bit-identical tables") {
  const auto corpus = bitext({{"a b c", "x y z"}, {"b c", "y z"}, {"a", "x"}});
  const auto r1 = train_ibm1(corpus, 8, true);
  const auto r2 = train_ibm1(corpus, 8, true);
  CHECK(r1.log_likelihood == r2.log_likelihood);
  for (const auto& source : r1.table.source_words()) {
    const auto row1 = r1.table.row(source);
    const auto row2 = r2.table.row(source);
    REQUIRE(row1.size() == row2.size());
    for (std::size_t i = 0; i < row1.size(); ++i) {
      CHECK(row1[i].first == row2[i].first);
      CHECK(row1[i].second == row2[i].second);  // exact equality
    }
  }
}

TEST_CASE("extract_alignments: trivial one-word table") {
  TranslationTable table;
  table.set_prob("a", "x", 1.0);
  const auto set = extract_alignments(table, make_sentence("en", "a"), make_sentence("xx", "x"));
  REQUIRE(set.links.size() == 1);
  CHECK(set.links[0] == AlignmentLink{0, 0});
}

TEST_CASE("extract_alignments: fully unseen sentence pair yields the empty set") {
  TranslationTable table;
  table.set_prob("a", "x", 1.0);
  const auto set =
      extract_alignments(table, make_sentence("en", "foo bar"), make_sentence("xx", "baz"));
  CHECK(set.links.empty());
}

TEST_CASE("extract_alignments: argmax on the trained toy table links both words") {
  const auto result = train_ibm1(bitext({{"a b", "x y"}, {"a c", "x z"}}), 10, false);
  const auto set = extract_alignments(result.table, make_sentence("en", "a b"),
                                      make_sentence("xx", "x y"));
  AlignmentSet expected;
  expected.add({0, 0});
  expected.add({1, 1});
  CHECK(set == expected);
}

TEST_CASE("extract_alignments: threshold mode keeps links above the posterior cutoff") {
  TranslationTable table;
  table.set_prob("a", "x", 0.9);
  table.set_prob("b", "x", 0.1);
  const auto strict = extract_alignments(table, make_sentence("en", "a b"),
                                         make_sentence("xx", "x"), 0.5);
  REQUIRE(strict.links.size() == 1);
  CHECK(strict.links[0] == AlignmentLink{0, 0});
  const auto loose = extract_alignments(table, make_sentence("en", "a b"),
                                        make_sentence("xx", "x"), 0.05);
  CHECK(loose.links.size() == 2);
}

TEST_CASE("extract_alignments: argmax ties break toward the lowest source index") {
  TranslationTable table;
  table.set_prob("a", "x", 0.5);
  table.set_prob("b", "x", 0.5);
  const auto set =
      extract_alignments(table, make_sentence("en", "b a"), make_sentence("xx", "x"));
  REQUIRE(set.links.size() == 1);
  CHECK(set.links[0] == AlignmentLink{0, 0});
}

TEST_CASE("symmetrize is set intersection") {
  AlignmentSet f, r;
  f.add({0, 0});
  f.add({1, 1});
  r.add({0, 0});
  r.add({1, 2});
  const auto both = symmetrize(f, r);
  REQUIRE(both.links.size() == 1);
  CHECK(both.links[0] == AlignmentLink{0, 0});

  CHECK(symmetrize(f, f) == f);
  AlignmentSet disjoint;
  disjoint.add({5, 5});
  CHECK(symmetrize(f, disjoint).links.empty());
}

TEST_CASE("symmetrize output is contained in both inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    AlignmentSet f, r;
    for (int i = 0; i < 6; ++i) f.add({rng.index(5), rng.index(5)});
    for (int i = 0; i < 6; ++i) r.add({rng.index(5), rng.index(5)});
    const auto both = symmetrize(f, r);
    for (const auto& link : both.links) {
      CHECK(f.contains(link));
      CHECK(r.contains(link));
    }
  }
}

TEST_CASE("read_pharaoh: format basics") {
  TempDir dir;
  write_file(dir.file("a.align"), "0-0 1-2\n\n3-1\n");
  const auto sets = read_pharaoh(dir.file("a.align"));
  REQUIRE(sets.size() == 3);
  AlignmentSet first;
  first.add({0, 0});
  first.add({1, 2});
  CHECK(sets[0] == first);
  CHECK(sets[1].links.empty());
  CHECK(sets[2].links.size() == 1);
}

TEST_CASE("read_pharaoh: malformed token reports the line number") {
  TempDir dir;
  write_file(dir.file("bad.align"), "0-0\nx-1\n");
  try {
    read_pharaoh(dir.file("bad.align"));
    FAIL("expected format_error");
  } catch (const format_error& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  write_file(dir.file("neg.align"), "0--1\n");
  CHECK_THROWS_AS(read_pharaoh(dir.file("neg.align")), format_error);
}

TEST_CASE("pharaoh round trip preserves link sets") {
  TempDir dir;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<AlignmentSet> sets(3 + rng.index(4));
    for (auto& set : sets) {
      const int links = rng.index(6);
      for (int i = 0; i < links; ++i) set.add({rng.index(8), rng.index(8)});
    }
    const auto path = dir.file("roundtrip.align");
    write_pharaoh(sets, path);
    CHECK(read_pharaoh(path) == sets);
  }
}

TEST_CASE("translation table TSV dump round trips") {
  TempDir dir;
  const auto result = train_ibm1(bitext({{"a b", "x y"}, {"b c", "y z"}}), 4, true);
  const auto path = dir.file("table.tsv");
  result.table.save_tsv(path);
  const auto loaded = TranslationTable::load_tsv(path);
  for (const auto& source : result.table.source_words()) {
    for (const auto& [target, p] : result.table.row(source)) {
      CHECK(loaded.prob(source, target) == p);
    }
  }
}

TEST_CASE("extraction validity: links stay inside the sentence pair") {
  const auto result = train_ibm1(bitext({{"a b c d", "p q r"}, {"c d", "r s"}}), 5, true);
  const auto src = make_sentence("en", "a b c d");
  const auto tgt = make_sentence("xx", "p q r s");
  for (const auto mode : {std::optional<double>{}, std::optional<double>{0.2}}) {
    const auto set = extract_alignments(result.table, src, tgt, mode);
    for (const auto& [p, q] : set.links) {
      CHECK(p >= 0);
      CHECK(p < static_cast<int>(src.tokens.size()));
      CHECK(q >= 0);
      CHECK(q < static_cast<int>(tgt.tokens.size()));
    }
  }
}
