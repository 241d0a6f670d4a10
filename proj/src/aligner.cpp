#include "xlqa/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "xlqa/errors.hpp"

namespace xlqa::aligner {

void AlignmentSet::add(AlignmentLink link) {
  const auto it = std::lower_bound(links.begin(), links.end(), link);
  if (it != links.end() && *it == link) return;
  links.insert(it, link);
}

bool AlignmentSet::contains(AlignmentLink link) const {
  return std::binary_search(links.begin(), links.end(), link);
}

int TranslationTable::intern(std::string_view word) {
  const int found = find(word);
  if (found >= 0) return found;
  const int id = static_cast<int>(words_.size());
  words_.emplace_back(word);
  rows_.emplace_back();
  const auto it = std::lower_bound(
      index_.begin(), index_.end(), word,
      [](const auto& entry, std::string_view w) { return entry.first < w; });
  index_.insert(it, {std::string(word), id});
  return id;
}

int TranslationTable::find(std::string_view word) const {
  const auto it = std::lower_bound(
      index_.begin(), index_.end(), word,
      [](const auto& entry, std::string_view w) { return entry.first < w; });
  if (it == index_.end() || it->first != word) return -1;
  return it->second;
}

double TranslationTable::prob(std::string_view source, std::string_view target) const {
  const int sid = find(source);
  const int tid = find(target);
  if (sid < 0 || tid < 0) return 0.0;
  const auto& row = rows_[sid];
  const auto it = std::lower_bound(row.begin(), row.end(), tid,
                                   [](const auto& e, int id) { return e.first < id; });
  if (it == row.end() || it->first != tid) return 0.0;
  return it->second;
}

void TranslationTable::set_prob(std::string_view source, std::string_view target, double p) {
  const int sid = intern(source);
  const int tid = intern(target);
  auto& row = rows_[sid];
  const auto it = std::lower_bound(row.begin(), row.end(), tid,
                                   [](const auto& e, int id) { return e.first < id; });
  if (it != row.end() && it->first == tid) {
    it->second = p;
  } else {
    row.insert(it, {tid, p});
  }
}

bool TranslationTable::has_source(std::string_view source) const {
  const int sid = find(source);
  return sid >= 0 && !rows_[sid].empty();
}

std::vector<std::string> TranslationTable::source_words() const {
  std::vector<std::string> out;
  for (const auto& [word, id] : index_) {
    if (!rows_[id].empty()) out.push_back(word);
  }
  return out;
}

std::vector<std::pair<std::string, double>> TranslationTable::row(std::string_view source) const {
  std::vector<std::pair<std::string, double>> out;
  const int sid = find(source);
  if (sid < 0) return out;
  for (const auto& [tid, p] : rows_[sid]) out.emplace_back(words_[tid], p);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void TranslationTable::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write table file: " + path);
  out << std::setprecision(17);
  for (const auto& source : source_words()) {
    for (const auto& [target, p] : row(source)) {
      out << source << '\t' << target << '\t' << p << '\n';
    }
  }
}

TranslationTable TranslationTable::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open table file: " + path);
  TranslationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw format_error(path + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    }
    const std::string source = line.substr(0, tab1);
    const std::string target = line.substr(tab1 + 1, tab2 - tab1 - 1);
    char* end = nullptr;
    const double p = std::strtod(line.c_str() + tab2 + 1, &end);
    if (end == line.c_str() + tab2 + 1) {
      throw format_error(path + ":" + std::to_string(line_no) + ": unparsable probability");
    }
    table.set_prob(source, target, p);
  }
  return table;
}

namespace {

std::vector<std::string> surfaces(const corpus::Sentence& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const auto& t : s.tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

Ibm1Result train_ibm1(const corpus::ParallelCorpus& corpus, int iterations, bool use_null) {
  if (iterations < 1) throw input_error("train_ibm1: iterations must be >= 1");
  if (corpus.pairs.empty()) throw input_error("train_ibm1: corpus is empty");

  // Intern words; id 0 is the NULL source when enabled.
  std::vector<std::string> words;
  std::vector<std::pair<std::string, int>> index;
  auto intern = [&](const std::string& w) {
    const auto it = std::lower_bound(index.begin(), index.end(), w,
                                     [](const auto& e, const std::string& x) { return e.first < x; });
    if (it != index.end() && it->first == w) return it->second;
    const int id = static_cast<int>(words.size());
    words.push_back(w);
    index.insert(it, {w, id});
    return id;
  };
  const int null_id = use_null ? intern(std::string(TranslationTable::kNullWord)) : -1;

  std::vector<std::vector<int>> src_ids, tgt_ids;
  src_ids.reserve(corpus.pairs.size());
  tgt_ids.reserve(corpus.pairs.size());
  for (const auto& [src, tgt] : corpus.pairs) {
    std::vector<int> s, t;
    for (const auto& w : surfaces(src)) s.push_back(intern(w));
    for (const auto& w : surfaces(tgt)) t.push_back(intern(w));
    src_ids.push_back(std::move(s));
    tgt_ids.push_back(std::move(t));
  }
  const int vocab = static_cast<int>(words.size());

  // Uniform initialization over co-occurring (source, target) pairs; the
  // NULL source co-occurs with every target word.
  std::vector<std::vector<int>> cooc(vocab);  // per source id, sorted target ids
  auto note = [&](int s, int t) {
    auto& row = cooc[s];
    const auto it = std::lower_bound(row.begin(), row.end(), t);
    if (it == row.end() || *it != t) row.insert(it, t);
  };
  for (std::size_t k = 0; k < src_ids.size(); ++k) {
    for (const int t : tgt_ids[k]) {
      if (use_null) note(null_id, t);
      for (const int s : src_ids[k]) note(s, t);
    }
  }
  std::vector<std::vector<double>> prob(vocab);
  for (int s = 0; s < vocab; ++s) {
    if (cooc[s].empty()) continue;
    prob[s].assign(cooc[s].size(), 1.0 / static_cast<double>(cooc[s].size()));
  }
  auto t_prob = [&](int s, int t) -> double {
    const auto& row = cooc[s];
    const auto it = std::lower_bound(row.begin(), row.end(), t);
    if (it == row.end() || *it != t) return 0.0;
    return prob[s][static_cast<std::size_t>(it - row.begin())];
  };
  auto slot = [&](int s, int t) -> std::size_t {
    const auto& row = cooc[s];
    return static_cast<std::size_t>(std::lower_bound(row.begin(), row.end(), t) - row.begin());
  };

  std::vector<double> trace;
  trace.reserve(iterations);
  std::vector<std::vector<double>> counts(vocab);
  for (int iter = 0; iter < iterations; ++iter) {
    for (int s = 0; s < vocab; ++s) counts[s].assign(cooc[s].size(), 0.0);
    double loglik = 0.0;
    for (std::size_t k = 0; k < src_ids.size(); ++k) {
      const auto& src = src_ids[k];
      const auto& tgt = tgt_ids[k];
      const double candidates = static_cast<double>(src.size()) + (use_null ? 1.0 : 0.0);
      if (candidates == 0.0) continue;
      const double prior = 1.0 / candidates;
      for (const int t : tgt) {
        double denom = use_null ? t_prob(null_id, t) : 0.0;
        for (const int s : src) denom += t_prob(s, t);
        if (denom <= 0.0) continue;
        loglik += std::log(prior * denom);
        const double inv = 1.0 / denom;
        if (use_null) counts[null_id][slot(null_id, t)] += t_prob(null_id, t) * inv;
        for (const int s : src) counts[s][slot(s, t)] += t_prob(s, t) * inv;
      }
    }
    trace.push_back(loglik);
    for (int s = 0; s < vocab; ++s) {
      if (counts[s].empty()) continue;
      double total = 0.0;
      for (const double c : counts[s]) total += c;
      if (total <= 0.0) continue;
      for (std::size_t i = 0; i < counts[s].size(); ++i) prob[s][i] = counts[s][i] / total;
    }
  }

  Ibm1Result result;
  result.log_likelihood = std::move(trace);
  for (int s = 0; s < vocab; ++s) {
    for (std::size_t i = 0; i < cooc[s].size(); ++i) {
      result.table.set_prob(words[s], words[cooc[s][i]], prob[s][i]);
    }
  }
  return result;
}

AlignmentSet extract_alignments(const TranslationTable& table, const corpus::Sentence& source,
                                const corpus::Sentence& target, std::optional<double> threshold) {
  const auto src = surfaces(source);
  const auto tgt = surfaces(target);
  const bool null_competes = table.has_null();
  AlignmentSet out;
  for (std::size_t q = 0; q < tgt.size(); ++q) {
    const double null_p =
        null_competes ? table.prob(TranslationTable::kNullWord, tgt[q]) : 0.0;
    if (threshold) {
      double denom = null_p;
      std::vector<double> probs(src.size());
      for (std::size_t p = 0; p < src.size(); ++p) {
        probs[p] = table.prob(src[p], tgt[q]);
        denom += probs[p];
      }
      if (denom <= 0.0) continue;
      for (std::size_t p = 0; p < src.size(); ++p) {
        if (probs[p] / denom >= *threshold) {
          out.add({static_cast<int>(p), static_cast<int>(q)});
        }
      }
    } else {
      int best_p = -1;
      double best = 0.0;
      for (std::size_t p = 0; p < src.size(); ++p) {
        const double v = table.prob(src[p], tgt[q]);
        if (v > best) {  // strict: ties keep the lowest source index
          best = v;
          best_p = static_cast<int>(p);
        }
      }
      if (best_p < 0) continue;          // every source prob was 0
      if (null_p > best) continue;       // NULL wins this target word
      out.add({best_p, static_cast<int>(q)});
    }
  }
  return out;
}

AlignmentSet symmetrize(const AlignmentSet& forward, const AlignmentSet& reverse) {
  AlignmentSet out;
  std::set_intersection(forward.links.begin(), forward.links.end(), reverse.links.begin(),
                        reverse.links.end(), std::back_inserter(out.links));
  return out;
}

std::vector<AlignmentSet> read_pharaoh(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open alignment file: " + path);
  std::vector<AlignmentSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    AlignmentSet set;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const auto dash = tok.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 >= tok.size()) {
        throw format_error(path + ":" + std::to_string(line_no) + ": malformed link '" + tok + "'");
      }
      const auto parse_index = [&](const std::string& part) {
        char* end = nullptr;
        const long v = std::strtol(part.c_str(), &end, 10);
        if (end != part.c_str() + part.size() || v < 0) {
          throw format_error(path + ":" + std::to_string(line_no) + ": malformed link '" + tok +
                             "'");
        }
        return static_cast<int>(v);
      };
      const int p = parse_index(tok.substr(0, dash));
      const int q = parse_index(tok.substr(dash + 1));
      set.add({p, q});
    }
    out.push_back(std::move(set));
  }
  return out;
}

void write_pharaoh(const std::vector<AlignmentSet>& sets, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write alignment file: " + path);
  for (const auto& set : sets) {
    bool first = true;
    for (const auto& [p, q] : set.links) {
      if (!first) out << ' ';
      out << p << '-' << q;
      first = false;
    }
    out << '\n';
  }
}

}  // namespace xlqa::aligner
