#include "xlqa/evalsig.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

namespace xlqa::evalsig {

using corpus::MinimalAnswer;
using corpus::QAExample;
using nlohmann::json;
using qatask::QAPrediction;

namespace {

// Per-example scoring units: passage correctness triple and minimal credit.
struct ExampleStats {
  bool gold_passage_nonnull = false;
  bool pred_passage_nonnull = false;
  bool passage_correct = false;
  bool gold_minimal_nonnull = false;
  bool pred_minimal_nonnull = false;
  double minimal_credit = 0.0;  // counted when both sides are non-null
};

std::map<std::string, const QAPrediction*> index_predictions(
    const std::vector<QAPrediction>& preds, const std::vector<QAExample>& golds,
    const char* what) {
  std::set<std::string> gold_ids;
  for (const auto& g : golds) gold_ids.insert(g.id);
  std::map<std::string, const QAPrediction*> out;
  for (const auto& p : preds) {
    if (!gold_ids.count(p.id)) {
      throw input_error(std::string(what) + ": prediction id '" + p.id + "' has no gold example");
    }
    if (auto [it, inserted] = out.emplace(p.id, &p); !inserted) {
      throw input_error(std::string(what) + ": duplicate prediction id '" + p.id + "'");
    }
  }
  return out;
}

double span_overlap_credit(const MinimalAnswer& pred, const MinimalAnswer& gold) {
  if (pred.kind == MinimalAnswer::Kind::Span && gold.kind == MinimalAnswer::Kind::Span) {
    return span_f1({pred.span_start, pred.span_end}, {gold.span_start, gold.span_end});
  }
  const bool pred_yn =
      pred.kind == MinimalAnswer::Kind::Yes || pred.kind == MinimalAnswer::Kind::No;
  const bool gold_yn =
      gold.kind == MinimalAnswer::Kind::Yes || gold.kind == MinimalAnswer::Kind::No;
  if (pred_yn && gold_yn) return pred.kind == gold.kind ? 1.0 : 0.0;
  return 0.0;  // kind mismatch (span vs yes/no)
}

ExampleStats make_stats(const QAPrediction* pred, const QAExample& gold) {
  ExampleStats st;
  st.gold_passage_nonnull = gold.gold_passage.has_value();
  st.gold_minimal_nonnull = gold.gold_minimal.kind != MinimalAnswer::Kind::Null;
  if (pred == nullptr) return st;  // missing prediction counts as NULL
  st.pred_passage_nonnull = pred->passage_pred.has_value();
  st.passage_correct = st.gold_passage_nonnull && st.pred_passage_nonnull &&
                       *pred->passage_pred == *gold.gold_passage;
  st.pred_minimal_nonnull = pred->minimal_pred.kind != MinimalAnswer::Kind::Null;
  if (st.pred_minimal_nonnull && st.gold_minimal_nonnull) {
    st.minimal_credit = span_overlap_credit(pred->minimal_pred, gold.gold_minimal);
  }
  return st;
}

std::vector<ExampleStats> all_stats(const std::vector<QAPrediction>& preds,
                                    const std::vector<QAExample>& golds, const char* what) {
  const auto by_id = index_predictions(preds, golds, what);
  std::vector<ExampleStats> out;
  out.reserve(golds.size());
  for (const auto& g : golds) {
    const auto it = by_id.find(g.id);
    out.push_back(make_stats(it == by_id.end() ? nullptr : it->second, g));
  }
  return out;
}

PRF harmonic(double numerator, double pred_denom, double gold_denom) {
  PRF out;
  out.precision = pred_denom > 0.0 ? numerator / pred_denom : 0.0;
  out.recall = gold_denom > 0.0 ? numerator / gold_denom : 0.0;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0.0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

PRF passage_prf(const std::vector<ExampleStats>& stats, const std::vector<std::size_t>& idx) {
  double correct = 0.0, pred_nn = 0.0, gold_nn = 0.0;
  for (const std::size_t i : idx) {
    const auto& st = stats[i];
    if (st.pred_passage_nonnull) ++pred_nn;
    if (st.gold_passage_nonnull) ++gold_nn;
    if (st.passage_correct) ++correct;
  }
  return harmonic(correct, pred_nn, gold_nn);
}

PRF minimal_prf(const std::vector<ExampleStats>& stats, const std::vector<std::size_t>& idx) {
  double credit = 0.0, pred_nn = 0.0, gold_nn = 0.0;
  for (const std::size_t i : idx) {
    const auto& st = stats[i];
    if (st.pred_minimal_nonnull) ++pred_nn;
    if (st.gold_minimal_nonnull) ++gold_nn;
    credit += st.minimal_credit;
  }
  return harmonic(credit, pred_nn, gold_nn);
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

PRF passage_f1(const std::vector<QAPrediction>& preds, const std::vector<QAExample>& golds) {
  const auto stats = all_stats(preds, golds, "passage_f1");
  return passage_prf(stats, all_indices(stats.size()));
}

double span_f1(std::pair<std::size_t, std::size_t> pred, std::pair<std::size_t, std::size_t> gold) {
  if (pred.first > pred.second) throw input_error("span_f1: prediction span start exceeds end");
  if (gold.first > gold.second) throw input_error("span_f1: gold span start exceeds end");
  const std::size_t pred_len = pred.second - pred.first;
  const std::size_t gold_len = gold.second - gold.first;
  if (pred_len == 0 || gold_len == 0) {
    return pred == gold ? 1.0 : 0.0;
  }
  const std::size_t lo = std::max(pred.first, gold.first);
  const std::size_t hi = std::min(pred.second, gold.second);
  const double overlap = hi > lo ? static_cast<double>(hi - lo) : 0.0;
  if (overlap == 0.0) return 0.0;
  const double p = overlap / static_cast<double>(pred_len);
  const double r = overlap / static_cast<double>(gold_len);
  return 2.0 * p * r / (p + r);
}

PRF minimal_answer_f1(const std::vector<QAPrediction>& preds,
                      const std::vector<QAExample>& golds) {
  const auto stats = all_stats(preds, golds, "minimal_answer_f1");
  return minimal_prf(stats, all_indices(stats.size()));
}

double per_example_minimal_score(const MinimalAnswer& pred, const MinimalAnswer& gold) {
  const bool pred_null = pred.kind == MinimalAnswer::Kind::Null;
  const bool gold_null = gold.kind == MinimalAnswer::Kind::Null;
  if (pred_null && gold_null) return 1.0;
  if (pred_null != gold_null) return 0.0;
  return span_overlap_credit(pred, gold);
}

SignificanceResult bootstrap_significance(const std::vector<QAPrediction>& preds_a,
                                          const std::vector<QAPrediction>& preds_b,
                                          const std::vector<QAExample>& golds, Metric metric,
                                          int resamples, std::uint64_t seed) {
  if (resamples < 100) throw input_error("bootstrap_significance: resamples must be >= 100");
  if (golds.empty()) throw input_error("bootstrap_significance: no gold examples");
  {
    std::set<std::string> ids_a, ids_b;
    for (const auto& p : preds_a) ids_a.insert(p.id);
    for (const auto& p : preds_b) ids_b.insert(p.id);
    if (ids_a != ids_b) {
      throw input_error("bootstrap_significance: prediction sets cover different ids");
    }
  }
  const auto stats_a = all_stats(preds_a, golds, "bootstrap_significance");
  const auto stats_b = all_stats(preds_b, golds, "bootstrap_significance");

  Rng rng(seed);
  const std::size_t n = golds.size();
  int a_wins = 0, a_not_better = 0;
  std::vector<std::size_t> sample(n);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < n; ++i) sample[i] = rng.below(n);
    const double score_a =
        metric == Metric::Passage ? passage_prf(stats_a, sample).f1 : minimal_prf(stats_a, sample).f1;
    const double score_b =
        metric == Metric::Passage ? passage_prf(stats_b, sample).f1 : minimal_prf(stats_b, sample).f1;
    if (score_a > score_b) {
      ++a_wins;
    } else {
      ++a_not_better;  // ties count against the hypothesized-better system
    }
  }
  SignificanceResult result;
  result.resamples = resamples;
  result.seed = seed;
  result.win_fraction = static_cast<double>(a_wins) / static_cast<double>(resamples);
  result.p_value = static_cast<double>(a_not_better) / static_cast<double>(resamples);
  return result;
}

CrosstabCounts crosstab_correctness(const std::vector<QAPrediction>& preds_x,
                                    const std::vector<QAPrediction>& preds_y,
                                    const std::vector<QAExample>& golds) {
  {
    std::set<std::string> ids_x, ids_y;
    for (const auto& p : preds_x) ids_x.insert(p.id);
    for (const auto& p : preds_y) ids_y.insert(p.id);
    if (ids_x != ids_y) throw input_error("crosstab: prediction sets cover different ids");
  }
  const auto by_id_x = index_predictions(preds_x, golds, "crosstab");
  const auto by_id_y = index_predictions(preds_y, golds, "crosstab");
  CrosstabCounts counts;
  const MinimalAnswer null_answer;
  for (const auto& g : golds) {
    const auto itx = by_id_x.find(g.id);
    const auto ity = by_id_y.find(g.id);
    const double sx = per_example_minimal_score(
        itx == by_id_x.end() ? null_answer : itx->second->minimal_pred, g.gold_minimal);
    const double sy = per_example_minimal_score(
        ity == by_id_y.end() ? null_answer : ity->second->minimal_pred, g.gold_minimal);
    const bool x_full = sx == 1.0, x_zero = sx == 0.0;
    const bool y_full = sy == 1.0, y_zero = sy == 0.0;
    if ((!x_full && !x_zero) || (!y_full && !y_zero)) {
      ++counts.excluded;  // partially correct under either system
      continue;
    }
    if (x_full && y_full) {
      ++counts.both_correct;
    } else if (x_full && y_zero) {
      ++counts.x_correct_y_wrong;
    } else if (x_zero && y_full) {
      ++counts.x_wrong_y_correct;
    } else {
      ++counts.both_wrong;
    }
  }
  return counts;
}

EvalReport build_report(const std::vector<QAPrediction>& preds,
                        const std::vector<QAExample>& golds) {
  const auto by_id = index_predictions(preds, golds, "build_report");
  // Group example indices by (question_lang, context_lang).
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    groups[golds[i].question_lang][golds[i].context_lang].push_back(i);
  }
  std::vector<ExampleStats> stats;
  stats.reserve(golds.size());
  for (const auto& g : golds) {
    const auto it = by_id.find(g.id);
    stats.push_back(make_stats(it == by_id.end() ? nullptr : it->second, g));
  }
  EvalReport report;
  for (const auto& [qlang, by_clang] : groups) {
    EvalRow row;
    row.question_lang = qlang;
    double psum = 0.0, msum = 0.0;
    for (const auto& [clang, idx] : by_clang) {
      EvalCell cell;
      cell.question_lang = qlang;
      cell.context_lang = clang;
      cell.passage_f1 = passage_prf(stats, idx).f1;
      cell.minimal_f1 = minimal_prf(stats, idx).f1;
      cell.count = idx.size();
      psum += cell.passage_f1;
      msum += cell.minimal_f1;
      row.cells.push_back(std::move(cell));
    }
    row.avg_passage_f1 = psum / static_cast<double>(row.cells.size());
    row.avg_minimal_f1 = msum / static_cast<double>(row.cells.size());
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt_pct(double f1) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", f1 * 100.0);
  return buf;
}

std::vector<std::string> context_langs(const EvalReport& report) {
  std::set<std::string> langs;
  for (const auto& row : report.rows) {
    for (const auto& cell : row.cells) langs.insert(cell.context_lang);
  }
  return {langs.begin(), langs.end()};
}

const EvalCell* find_cell(const EvalRow& row, const std::string& clang) {
  for (const auto& cell : row.cells) {
    if (cell.context_lang == clang) return &cell;
  }
  return nullptr;
}

void render_task(std::ostringstream& out, const EvalReport& report,
                 const std::vector<std::string>& clangs, ReportFormat format, bool minimal) {
  const char* title = minimal ? "Minimal answer" : "Passage selection";
  if (format == ReportFormat::Tsv) {
    out << "# " << title << "\n";
    out << "question_lang";
    for (const auto& c : clangs) out << '\t' << c;
    out << "\tavg\n";
    for (const auto& row : report.rows) {
      out << row.question_lang;
      for (const auto& c : clangs) {
        const EvalCell* cell = find_cell(row, c);
        out << '\t' << (cell ? fmt_pct(minimal ? cell->minimal_f1 : cell->passage_f1) : "-");
      }
      out << '\t' << fmt_pct(minimal ? row.avg_minimal_f1 : row.avg_passage_f1) << "\n";
    }
  } else {
    out << "### " << title << "\n\n";
    out << "| question_lang |";
    for (const auto& c : clangs) out << ' ' << c << " |";
    out << " avg |\n";
    out << "| --- |";
    for (std::size_t i = 0; i < clangs.size() + 1; ++i) out << " --- |";
    out << "\n";
    for (const auto& row : report.rows) {
      out << "| " << row.question_lang << " |";
      for (const auto& c : clangs) {
        const EvalCell* cell = find_cell(row, c);
        out << ' ' << (cell ? fmt_pct(minimal ? cell->minimal_f1 : cell->passage_f1) : "-")
            << " |";
      }
      out << ' ' << fmt_pct(minimal ? row.avg_minimal_f1 : row.avg_passage_f1) << " |\n";
    }
    out << "\n";
  }
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  std::ostringstream out;
  const auto clangs = context_langs(report);
  render_task(out, report, clangs, format, false);
  if (format == ReportFormat::Tsv) out << "\n";
  render_task(out, report, clangs, format, true);
  return out.str();
}

void save_report(const EvalReport& report, const std::string& path) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json cells = json::array();
    for (const auto& cell : row.cells) {
      cells.push_back({{"question_lang", cell.question_lang},
                       {"context_lang", cell.context_lang},
                       {"passage_f1", cell.passage_f1},
                       {"minimal_f1", cell.minimal_f1},
                       {"count", cell.count}});
    }
    rows.push_back({{"question_lang", row.question_lang},
                    {"cells", std::move(cells)},
                    {"avg_passage_f1", row.avg_passage_f1},
                    {"avg_minimal_f1", row.avg_minimal_f1}});
  }
  const json j = {{"format", "xlqa-report"}, {"rows", std::move(rows)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write report file: " + path);
  out << j.dump(1, '\t') << "\n";
}

EvalReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open report file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw format_error("report file " + path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != "xlqa-report") {
    throw format_error("report file " + path + ": missing xlqa-report marker");
  }
  EvalReport report;
  for (const auto& rj : j.at("rows")) {
    EvalRow row;
    row.question_lang = rj.at("question_lang").get<std::string>();
    for (const auto& cj : rj.at("cells")) {
      EvalCell cell;
      cell.question_lang = cj.at("question_lang").get<std::string>();
      cell.context_lang = cj.at("context_lang").get<std::string>();
      cell.passage_f1 = cj.at("passage_f1").get<double>();
      cell.minimal_f1 = cj.at("minimal_f1").get<double>();
      cell.count = cj.at("count").get<std::size_t>();
      row.cells.push_back(std::move(cell));
    }
    row.avg_passage_f1 = rj.at("avg_passage_f1").get<double>();
    row.avg_minimal_f1 = rj.at("avg_minimal_f1").get<double>();
    report.rows.push_back(std::move(row));
  }
  return report;
}

void save_significance(const SignificanceResult& result, Metric metric, const std::string& path) {
  const json j = {{"metric", metric == Metric::Passage ? "passage" : "minimal"},
                  {"p_value", result.p_value},
                  {"win_fraction", result.win_fraction},
                  {"resamples", result.resamples},
                  {"seed", result.seed}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write significance file: " + path);
  out << j.dump(1, '\t') << "\n";
}

}  // namespace xlqa::evalsig
