// Pipeline driver: every stage runs as a subcommand over files, reproducible
// from a JSON config plus a seed. Each output gets a .meta.json sidecar with
// the config hash, effective seed and input digests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xlqa/aligner.hpp"
#include "xlqa/alignft.hpp"
#include "xlqa/corpus.hpp"
#include "xlqa/encoder.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/evalsig.hpp"
#include "xlqa/gradcheck.hpp"
#include "xlqa/qatask.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw xlqa::input_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void require_file(const std::string& path, const std::string& producer) {
  if (fs::exists(path)) return;
  std::string msg = "missing input '" + path + "'";
  if (!producer.empty()) msg += "; produce it with 'xlqa " + producer + "'";
  throw xlqa::input_error(msg);
}

// Run-metadata sidecar beside every output artifact. No timestamps: reruns
// with identical inputs must be byte-identical.
void write_meta(const std::string& out_path, const std::string& command,
                const std::string& config_hash, std::uint64_t seed,
                const std::vector<std::string>& inputs) {
  json meta;
  meta["command"] = command;
  meta["config_hash"] = config_hash;
  meta["seed"] = seed;
  json digests;
  for (const auto& path : inputs) {
    digests[path] = "fnv64:" + hex64(fnv1a64(slurp(path)));
  }
  meta["inputs"] = std::move(digests);
  std::ofstream out(out_path + ".meta.json", std::ios::binary);
  if (!out) throw xlqa::input_error("cannot write sidecar for: " + out_path);
  out << meta.dump(1, '\t') << "\n";
}

struct CorpusSpec {
  std::string src, tgt, src_lang, tgt_lang;
  std::string alignments;  // path or "auto-ibm1"
  int ibm1_iterations = 10;
};

struct PipelineConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int vocab_merges = 200;
  xlqa::encoder::EncoderConfig encoder;  // vocab_size filled from the vocab file
  xlqa::alignft::AlignTrainConfig align_train;
  xlqa::qatask::QATuneConfig task_tune;
  int max_span_subwords = 30;
  std::vector<CorpusSpec> corpora;
  std::map<std::string, std::string> datasets;
  std::string config_hash = "-";
  std::string config_path;
};

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

xlqa::alignft::Sampling parse_sampling(const std::string& v, const std::string& field) {
  if (v == "proportional") return xlqa::alignft::Sampling::Proportional;
  if (v == "uniform_per_corpus") return xlqa::alignft::Sampling::UniformPerCorpus;
  throw xlqa::input_error("config: " + field + ": expected proportional|uniform_per_corpus, got '" +
                          v + "'");
}

xlqa::alignft::Optimizer parse_optimizer(const std::string& v, const std::string& field) {
  if (v == "sgd") return xlqa::alignft::Optimizer::Sgd;
  if (v == "adam") return xlqa::alignft::Optimizer::Adam;
  throw xlqa::input_error("config: " + field + ": expected sgd|adam, got '" + v + "'");
}

PipelineConfig load_config(const std::string& path) {
  require_file(path, "");
  const std::string raw = slurp(path);
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::exception& e) {
    throw xlqa::format_error("config " + path + ": " + e.what());
  }
  PipelineConfig cfg;
  cfg.config_path = path;
  cfg.config_hash = "fnv64:" + hex64(fnv1a64(raw));
  try {
    maybe(j, "seed", cfg.seed);
    maybe(j, "out_dir", cfg.out_dir);
    maybe(j, "vocab_merges", cfg.vocab_merges);
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      maybe(e, "hidden_dim", cfg.encoder.hidden_dim);
      maybe(e, "num_layers", cfg.encoder.num_layers);
      maybe(e, "num_heads", cfg.encoder.num_heads);
      maybe(e, "ffn_dim", cfg.encoder.ffn_dim);
      maybe(e, "max_seq_len", cfg.encoder.max_seq_len);
    }
    if (j.contains("align_train")) {
      const auto& a = j.at("align_train");
      maybe(a, "learning_rate", cfg.align_train.learning_rate);
      maybe(a, "epochs", cfg.align_train.epochs);
      maybe(a, "batch_size", cfg.align_train.batch_size);
      maybe(a, "align_layer", cfg.align_train.align_layer);
      maybe(a, "lambda", cfg.align_train.lambda);
      if (a.contains("sampling")) {
        cfg.align_train.sampling =
            parse_sampling(a.at("sampling").get<std::string>(), "align_train.sampling");
      }
      if (a.contains("optimizer")) {
        cfg.align_train.optimizer =
            parse_optimizer(a.at("optimizer").get<std::string>(), "align_train.optimizer");
      }
    }
    if (j.contains("task_tune")) {
      const auto& t = j.at("task_tune");
      maybe(t, "learning_rate", cfg.task_tune.learning_rate);
      maybe(t, "epochs", cfg.task_tune.epochs);
      maybe(t, "batch_size", cfg.task_tune.batch_size);
      maybe(t, "max_span_subwords", cfg.max_span_subwords);
      if (t.contains("optimizer")) {
        cfg.task_tune.optimizer =
            parse_optimizer(t.at("optimizer").get<std::string>(), "task_tune.optimizer");
      }
    }
    if (j.contains("corpora")) {
      std::size_t i = 0;
      for (const auto& c : j.at("corpora")) {
        CorpusSpec spec;
        const std::string field = "corpora[" + std::to_string(i) + "]";
        if (!c.contains("src") || !c.contains("tgt")) {
          throw xlqa::input_error("config: " + field + ": needs src and tgt paths");
        }
        spec.src = c.at("src").get<std::string>();
        spec.tgt = c.at("tgt").get<std::string>();
        spec.src_lang = c.value("src_lang", "src");
        spec.tgt_lang = c.value("tgt_lang", "tgt");
        spec.alignments = c.value("alignments", "auto-ibm1");
        spec.ibm1_iterations = c.value("ibm1_iterations", 10);
        cfg.corpora.push_back(std::move(spec));
        ++i;
      }
    }
    if (j.contains("datasets")) {
      for (const auto& [key, value] : j.at("datasets").items()) {
        cfg.datasets[key] = value.get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    throw xlqa::format_error("config " + path + ": " + e.what());
  }
  // Referenced inputs must resolve at validation time, not at stage time.
  for (std::size_t i = 0; i < cfg.corpora.size(); ++i) {
    const auto& spec = cfg.corpora[i];
    const std::string field = "corpora[" + std::to_string(i) + "]";
    if (!fs::exists(spec.src)) {
      throw xlqa::input_error("config: " + field + ".src: file not found: " + spec.src);
    }
    if (!fs::exists(spec.tgt)) {
      throw xlqa::input_error("config: " + field + ".tgt: file not found: " + spec.tgt);
    }
    if (spec.alignments != "auto-ibm1" && !fs::exists(spec.alignments)) {
      throw xlqa::input_error("config: " + field + ".alignments: file not found: " +
                              spec.alignments);
    }
  }
  for (const auto& [key, value] : cfg.datasets) {
    if (!fs::exists(value)) {
      throw xlqa::input_error("config: datasets." + key + ": file not found: " + value);
    }
  }
  return cfg;
}

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

std::vector<xlqa::corpus::ParallelCorpus> load_all_bitext(const PipelineConfig& cfg) {
  if (cfg.corpora.empty()) throw xlqa::input_error("config: corpora list is empty");
  std::vector<xlqa::corpus::ParallelCorpus> out;
  for (const auto& spec : cfg.corpora) {
    out.push_back(xlqa::corpus::load_parallel(spec.src, spec.tgt, spec.src_lang, spec.tgt_lang));
  }
  return out;
}

// Alignment sets for one corpus: imported Pharaoh file or in-repo IBM-1.
std::vector<xlqa::aligner::AlignmentSet> alignments_for(
    const CorpusSpec& spec, const xlqa::corpus::ParallelCorpus& bitext) {
  if (spec.alignments != "auto-ibm1") {
    auto sets = xlqa::aligner::read_pharaoh(spec.alignments);
    if (sets.size() != bitext.pairs.size()) {
      throw xlqa::input_error("alignments " + spec.alignments + ": " +
                              std::to_string(sets.size()) + " lines for " +
                              std::to_string(bitext.pairs.size()) + " sentence pairs");
    }
    return sets;
  }
  const auto trained = xlqa::aligner::train_ibm1(bitext, spec.ibm1_iterations, true);
  std::vector<xlqa::aligner::AlignmentSet> sets;
  sets.reserve(bitext.pairs.size());
  for (const auto& [src, tgt] : bitext.pairs) {
    sets.push_back(xlqa::aligner::extract_alignments(trained.table, src, tgt));
  }
  return sets;
}

void save_trace(const std::vector<double>& trace, const std::string& path) {
  json j;
  j["trace"] = trace;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw xlqa::input_error("cannot write trace file: " + path);
  out << j.dump(1, '\t') << "\n";
}

int cmd_build_vocab(const PipelineConfig& cfg, std::string out) {
  if (out.empty()) out = out_path(cfg, "vocab.json");
  const auto corpora = load_all_bitext(cfg);
  const auto vocab = xlqa::corpus::build_vocab(corpora, cfg.vocab_merges);
  vocab.save(out);
  std::vector<std::string> inputs;
  for (const auto& spec : cfg.corpora) {
    inputs.push_back(spec.src);
    inputs.push_back(spec.tgt);
  }
  write_meta(out, "build-vocab", cfg.config_hash, cfg.seed, inputs);
  std::cout << "wrote " << out << " (" << vocab.size() << " entries, " << vocab.merges().size()
            << " merges)\n";
  return 0;
}

int cmd_align_corpus(const std::string& src, const std::string& tgt, const std::string& src_lang,
                     const std::string& tgt_lang, int iterations, bool no_null,
                     std::optional<double> threshold, bool symmetrize_links,
                     const std::string& out, const std::string& table_out) {
  require_file(src, "");
  require_file(tgt, "");
  const auto bitext = xlqa::corpus::load_parallel(src, tgt, src_lang, tgt_lang);
  const auto forward = xlqa::aligner::train_ibm1(bitext, iterations, !no_null);

  std::vector<xlqa::aligner::AlignmentSet> sets;
  sets.reserve(bitext.pairs.size());
  if (symmetrize_links) {
    xlqa::corpus::ParallelCorpus reversed;
    reversed.source_lang = bitext.target_lang;
    reversed.target_lang = bitext.source_lang;
    for (const auto& [s, t] : bitext.pairs) reversed.pairs.emplace_back(t, s);
    const auto backward = xlqa::aligner::train_ibm1(reversed, iterations, !no_null);
    for (const auto& [s, t] : bitext.pairs) {
      const auto fwd = xlqa::aligner::extract_alignments(forward.table, s, t, threshold);
      const auto rev = xlqa::aligner::extract_alignments(backward.table, t, s, threshold);
      xlqa::aligner::AlignmentSet transposed;
      for (const auto& [p, q] : rev.links) transposed.add({q, p});
      sets.push_back(xlqa::aligner::symmetrize(fwd, transposed));
    }
  } else {
    for (const auto& [s, t] : bitext.pairs) {
      sets.push_back(xlqa::aligner::extract_alignments(forward.table, s, t, threshold));
    }
  }
  xlqa::aligner::write_pharaoh(sets, out);
  write_meta(out, "align-corpus", "-", 0, {src, tgt});
  if (!table_out.empty()) {
    forward.table.save_tsv(table_out);
    write_meta(table_out, "align-corpus", "-", 0, {src, tgt});
  }
  std::cout << "wrote " << out << " (" << sets.size() << " sentence pairs, final log-likelihood "
            << forward.log_likelihood.back() << ")\n";
  return 0;
}

int cmd_align_finetune(const PipelineConfig& cfg, const std::string& vocab_path,
                       const std::string& init_path, std::string out,
                       const std::string& distance_report) {
  if (out.empty()) out = out_path(cfg, "aligned.ckpt");
  require_file(vocab_path, "build-vocab --config " + cfg.config_path);
  const auto vocab = xlqa::corpus::Vocabulary::load(vocab_path);

  std::vector<xlqa::alignft::AlignedCorpus> corpora;
  std::vector<std::string> inputs = {vocab_path};
  const auto bitexts = load_all_bitext(cfg);
  for (std::size_t i = 0; i < bitexts.size(); ++i) {
    xlqa::alignft::AlignedCorpus ac;
    ac.bitext = bitexts[i];
    ac.alignments = alignments_for(cfg.corpora[i], bitexts[i]);
    corpora.push_back(std::move(ac));
    inputs.push_back(cfg.corpora[i].src);
    inputs.push_back(cfg.corpora[i].tgt);
    if (cfg.corpora[i].alignments != "auto-ibm1") inputs.push_back(cfg.corpora[i].alignments);
  }

  xlqa::encoder::EncoderParams params;
  if (!init_path.empty()) {
    require_file(init_path, "");
    params = xlqa::encoder::load_checkpoint(init_path);
    inputs.push_back(init_path);
  } else {
    auto enc_cfg = cfg.encoder;
    enc_cfg.vocab_size = vocab.size();
    enc_cfg.seed = cfg.seed;
    params = xlqa::encoder::init_params(enc_cfg);
  }

  auto train_cfg = cfg.align_train;
  train_cfg.seed = cfg.seed;
  const auto result =
      xlqa::alignft::train_alignment(std::move(params), vocab, corpora, train_cfg);

  xlqa::encoder::save_checkpoint(out, result.params);
  write_meta(out, "align-finetune", cfg.config_hash, cfg.seed, inputs);
  const std::string init_out = out + ".init";
  xlqa::encoder::save_checkpoint(init_out, result.initial.params());
  write_meta(init_out, "align-finetune", cfg.config_hash, cfg.seed, inputs);
  const std::string trace_out = out + ".trace.json";
  save_trace(result.epoch_objective, trace_out);
  write_meta(trace_out, "align-finetune", cfg.config_hash, cfg.seed, inputs);

  if (!distance_report.empty()) {
    const auto pairs = xlqa::alignft::flatten_corpora(corpora);
    const auto report = xlqa::alignft::pair_distance_report(
        result.params, result.initial, vocab, pairs, train_cfg.align_layer, cfg.seed);
    json j;
    if (report.mean_aligned_distance) j["mean_aligned_distance"] = *report.mean_aligned_distance;
    if (report.mean_random_distance) j["mean_random_distance"] = *report.mean_random_distance;
    j["mean_drift"] = report.mean_drift;
    j["pairs_used"] = report.pairs_used;
    j["links_used"] = report.links_used;
    std::ofstream dr(distance_report, std::ios::binary);
    if (!dr) throw xlqa::input_error("cannot write distance report: " + distance_report);
    dr << j.dump(1, '\t') << "\n";
    write_meta(distance_report, "align-finetune", cfg.config_hash, cfg.seed, inputs);
  }
  std::cout << "wrote " << out << " (objective " << result.epoch_objective.front() << " -> "
            << result.epoch_objective.back() << " over " << result.epoch_objective.size()
            << " epochs, " << result.pairs_skipped << " pairs skipped)\n";
  return 0;
}

int cmd_augment(const std::string& dataset, const std::string& translations,
                const std::string& out) {
  require_file(dataset, "");
  require_file(translations, "");
  const auto examples = xlqa::corpus::load_qa_dataset(dataset);
  const auto ts = xlqa::corpus::load_translations(translations);
  std::vector<std::string> warnings;
  const auto augmented = xlqa::corpus::augment_crosslingual(examples, ts, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  xlqa::corpus::save_qa_dataset(augmented, out);
  write_meta(out, "augment", "-", 0, {dataset, translations});
  std::cout << "wrote " << out << " (" << examples.size() << " originals + "
            << augmented.size() - examples.size() << " augmented)\n";
  return 0;
}

int cmd_task_tune(const PipelineConfig& cfg, const std::string& vocab_path, std::string dataset,
                  const std::string& init_path, std::string out) {
  if (out.empty()) out = out_path(cfg, "qa_model.ckpt");
  if (dataset.empty()) {
    const auto it = cfg.datasets.find("train");
    if (it == cfg.datasets.end()) {
      throw xlqa::input_error("config: datasets.train missing and no --dataset given");
    }
    dataset = it->second;
  }
  require_file(vocab_path, "build-vocab --config " + cfg.config_path);
  require_file(dataset, "");
  const auto vocab = xlqa::corpus::Vocabulary::load(vocab_path);
  const auto examples = xlqa::corpus::load_qa_dataset(dataset);

  std::vector<std::string> inputs = {vocab_path, dataset};
  xlqa::encoder::EncoderParams params;
  if (!init_path.empty()) {
    require_file(init_path, "align-finetune --config " + cfg.config_path);
    params = xlqa::encoder::load_checkpoint(init_path);
    inputs.push_back(init_path);
  } else {
    auto enc_cfg = cfg.encoder;
    enc_cfg.vocab_size = vocab.size();
    enc_cfg.seed = cfg.seed;
    params = xlqa::encoder::init_params(enc_cfg);
  }
  auto model = xlqa::qatask::init_qa_model(std::move(params), cfg.seed + 1);
  model.max_span_subwords = cfg.max_span_subwords;

  auto tune_cfg = cfg.task_tune;
  tune_cfg.seed = cfg.seed;
  const auto result = xlqa::qatask::task_tune(std::move(model), vocab, examples, tune_cfg);
  xlqa::qatask::save_qa_model(out, result.model);
  write_meta(out, "task-tune", cfg.config_hash, cfg.seed, inputs);
  const std::string trace_out = out + ".trace.json";
  save_trace(result.loss_trace, trace_out);
  write_meta(trace_out, "task-tune", cfg.config_hash, cfg.seed, inputs);
  std::cout << "wrote " << out << " (loss " << result.loss_trace.front() << " -> "
            << result.loss_trace.back() << ")\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& vocab_path,
                const std::string& dataset, const std::string& out) {
  require_file(model_path, "task-tune");
  require_file(vocab_path, "build-vocab");
  require_file(dataset, "");
  const auto model = xlqa::qatask::load_qa_model(model_path);
  const auto vocab = xlqa::corpus::Vocabulary::load(vocab_path);
  const auto examples = xlqa::corpus::load_qa_dataset(dataset);
  const auto preds = xlqa::qatask::predict(model, vocab, examples);
  xlqa::qatask::save_predictions(preds, out);
  write_meta(out, "predict", "-", 0, {model_path, vocab_path, dataset});
  std::cout << "wrote " << out << " (" << preds.size() << " predictions)\n";
  return 0;
}

int cmd_evaluate(const std::string& preds_path, const std::string& golds_path,
                 const std::string& out) {
  require_file(preds_path, "predict");
  require_file(golds_path, "");
  const auto preds = xlqa::qatask::load_predictions(preds_path);
  const auto golds = xlqa::corpus::load_qa_dataset(golds_path);
  const auto report = xlqa::evalsig::build_report(preds, golds);
  xlqa::evalsig::save_report(report, out);
  write_meta(out, "evaluate", "-", 0, {preds_path, golds_path});
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_significance(const std::string& preds_a, const std::string& preds_b,
                     const std::string& golds_path, const std::string& metric_name, int resamples,
                     std::uint64_t seed, const std::string& out) {
  require_file(preds_a, "predict");
  require_file(preds_b, "predict");
  require_file(golds_path, "");
  xlqa::evalsig::Metric metric;
  if (metric_name == "passage") {
    metric = xlqa::evalsig::Metric::Passage;
  } else if (metric_name == "minimal") {
    metric = xlqa::evalsig::Metric::Minimal;
  } else {
    throw xlqa::input_error("--metric must be passage or minimal");
  }
  const auto a = xlqa::qatask::load_predictions(preds_a);
  const auto b = xlqa::qatask::load_predictions(preds_b);
  const auto golds = xlqa::corpus::load_qa_dataset(golds_path);
  const auto result = xlqa::evalsig::bootstrap_significance(a, b, golds, metric, resamples, seed);
  xlqa::evalsig::save_significance(result, metric, out);
  write_meta(out, "significance", "-", seed, {preds_a, preds_b, golds_path});
  std::cout << "p_value " << result.p_value << ", win_fraction " << result.win_fraction << " ("
            << resamples << " resamples)\n";
  return 0;
}

int cmd_crosstab(const std::string& preds_x, const std::string& preds_y,
                 const std::string& golds_path, const std::string& out) {
  require_file(preds_x, "predict");
  require_file(preds_y, "predict");
  require_file(golds_path, "");
  const auto x = xlqa::qatask::load_predictions(preds_x);
  const auto y = xlqa::qatask::load_predictions(preds_y);
  const auto golds = xlqa::corpus::load_qa_dataset(golds_path);
  const auto counts = xlqa::evalsig::crosstab_correctness(x, y, golds);
  json j;
  j["both_correct"] = counts.both_correct;
  j["x_correct_y_wrong"] = counts.x_correct_y_wrong;
  j["x_wrong_y_correct"] = counts.x_wrong_y_correct;
  j["both_wrong"] = counts.both_wrong;
  j["excluded_partial"] = counts.excluded;
  std::ofstream outfile(out, std::ios::binary);
  if (!outfile) throw xlqa::input_error("cannot write crosstab file: " + out);
  outfile << j.dump(1, '\t') << "\n";
  write_meta(out, "crosstab", "-", 0, {preds_x, preds_y, golds_path});
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int trials, int max_coords) {
  double worst = 0.0;
  std::size_t coords = 0;
  for (int t = 0; t < trials; ++t) {
    const auto result = xlqa::gradcheck::check_alignment_objective(seed + t, max_coords);
    worst = std::max(worst, result.max_rel_error);
    coords += result.coords_checked;
  }
  std::cout << "max relative error " << worst << " over " << coords << " coordinates (" << trials
            << " trials)\n";
  return worst < 1e-4 ? 0 : 1;
}

int cmd_report(const std::string& report_path, const std::string& format_name,
               const std::string& out) {
  require_file(report_path, "evaluate");
  xlqa::evalsig::ReportFormat format;
  if (format_name == "tsv") {
    format = xlqa::evalsig::ReportFormat::Tsv;
  } else if (format_name == "markdown") {
    format = xlqa::evalsig::ReportFormat::Markdown;
  } else {
    throw xlqa::input_error("--format must be tsv or markdown");
  }
  const auto report = xlqa::evalsig::load_report(report_path);
  const auto text = xlqa::evalsig::render_report(report, format);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream outfile(out, std::ios::binary);
    if (!outfile) throw xlqa::input_error("cannot write report file: " + out);
    outfile << text;
    write_meta(out, "report", "-", 0, {report_path});
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-lingual extractive QA toolkit: alignment fine-tuning, task-tuning, "
               "evaluation and significance testing over files"};
  app.require_subcommand(1);

  std::string config_path, out, vocab_path, init_path, dataset, translations;
  std::string model_path, preds_a, preds_b, golds_path, metric = "minimal";
  std::string report_path, format_name = "tsv", table_out, distance_report;
  std::string src, tgt, src_lang = "src", tgt_lang = "tgt";
  std::uint64_t seed = 0;
  bool no_null = false, symmetrize_links = false;
  int iterations = 10, resamples = 1000, trials = 5, max_coords = 300;
  double threshold = -1.0;

  CLI::Option* seed_opt = nullptr;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    seed_opt = cmd->add_option("--seed", seed, "override the config seed");
  };

  auto* c_vocab = app.add_subcommand("build-vocab", "learn the BPE vocabulary from the bitext");
  add_config(c_vocab);
  auto* vocab_seed = seed_opt;
  c_vocab->add_option("--out", out, "output vocabulary path");

  auto* c_align = app.add_subcommand("align-corpus", "IBM-1 word alignment of one bitext");
  c_align->add_option("--src", src, "source bitext file")->required();
  c_align->add_option("--tgt", tgt, "target bitext file")->required();
  c_align->add_option("--src-lang", src_lang, "source language code");
  c_align->add_option("--tgt-lang", tgt_lang, "target language code");
  c_align->add_option("--iterations", iterations, "EM iterations");
  c_align->add_flag("--no-null", no_null, "disable the NULL source word");
  c_align->add_option("--threshold", threshold, "posterior threshold (default: argmax mode)");
  c_align->add_flag("--symmetrize", symmetrize_links, "intersect forward and reverse alignments");
  c_align->add_option("--out", out, "output Pharaoh file")->required();
  c_align->add_option("--table", table_out, "optional translation-table TSV dump");

  auto* c_ft = app.add_subcommand("align-finetune",
                                  "alignment fine-tuning of the encoder on aligned bitext");
  add_config(c_ft);
  auto* ft_seed = seed_opt;
  c_ft->add_option("--vocab", vocab_path, "vocabulary file (default <out_dir>/vocab.json)");
  c_ft->add_option("--init", init_path, "initial encoder checkpoint (default: fresh init)");
  c_ft->add_option("--out", out, "output checkpoint path");
  c_ft->add_option("--distance-report", distance_report, "write a pair-distance report JSON");

  auto* c_aug = app.add_subcommand("augment", "add translated-question copies to a dataset");
  c_aug->add_option("--dataset", dataset, "QA dataset JSONL")->required();
  c_aug->add_option("--translations", translations, "translations JSONL")->required();
  c_aug->add_option("--out", out, "output dataset path")->required();

  auto* c_tune = app.add_subcommand("task-tune", "train the QA heads (and encoder) on a dataset");
  add_config(c_tune);
  auto* tune_seed = seed_opt;
  c_tune->add_option("--vocab", vocab_path, "vocabulary file (default <out_dir>/vocab.json)");
  c_tune->add_option("--dataset", dataset, "training dataset (default config datasets.train)");
  c_tune->add_option("--init", init_path, "encoder checkpoint to start from");
  c_tune->add_option("--out", out, "output model checkpoint");

  auto* c_pred = app.add_subcommand("predict", "run the QA model over a dataset");
  c_pred->add_option("--model", model_path, "QA model checkpoint")->required();
  c_pred->add_option("--vocab", vocab_path, "vocabulary file")->required();
  c_pred->add_option("--dataset", dataset, "dataset JSONL")->required();
  c_pred->add_option("--out", out, "output predictions JSONL")->required();

  auto* c_eval = app.add_subcommand("evaluate", "score predictions into a report JSON");
  c_eval->add_option("--preds", preds_a, "predictions JSONL")->required();
  c_eval->add_option("--golds", golds_path, "gold dataset JSONL")->required();
  c_eval->add_option("--out", out, "output report JSON")->required();

  auto* c_sig = app.add_subcommand("significance", "pairwise bootstrap resampling test");
  c_sig->add_option("--preds-a", preds_a, "system A predictions")->required();
  c_sig->add_option("--preds-b", preds_b, "system B predictions")->required();
  c_sig->add_option("--golds", golds_path, "gold dataset JSONL")->required();
  c_sig->add_option("--metric", metric, "passage|minimal");
  c_sig->add_option("--resamples", resamples, "bootstrap resamples (>= 100)");
  c_sig->add_option("--seed", seed, "resampling seed");
  c_sig->add_option("--out", out, "output JSON")->required();

  auto* c_cross = app.add_subcommand("crosstab", "correct/incorrect cross-tabulation");
  c_cross->add_option("--preds-x", preds_a, "system X predictions")->required();
  c_cross->add_option("--preds-y", preds_b, "system Y predictions")->required();
  c_cross->add_option("--golds", golds_path, "gold dataset JSONL")->required();
  c_cross->add_option("--out", out, "output JSON")->required();

  auto* c_grad =
      app.add_subcommand("gradcheck", "finite-difference check of the alignment objective");
  c_grad->add_option("--seed", seed, "base scenario seed");
  c_grad->add_option("--trials", trials, "number of random scenarios");
  c_grad->add_option("--max-coords", max_coords, "coordinate cap per tensor (0 = all)");

  auto* c_report = app.add_subcommand("report", "render a report JSON as TSV or Markdown");
  c_report->add_option("--report", report_path, "report JSON from 'evaluate'")->required();
  c_report->add_option("--format", format_name, "tsv|markdown");
  c_report->add_option("--out", out, "output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_vocab)) {
      auto cfg = load_config(config_path);
      if (vocab_seed->count() > 0) cfg.seed = seed;
      return cmd_build_vocab(cfg, out);
    }
    if (app.got_subcommand(c_align)) {
      std::optional<double> thr;
      if (threshold >= 0.0) thr = threshold;
      return cmd_align_corpus(src, tgt, src_lang, tgt_lang, iterations, no_null, thr,
                              symmetrize_links, out, table_out);
    }
    if (app.got_subcommand(c_ft)) {
      auto cfg = load_config(config_path);
      if (ft_seed->count() > 0) cfg.seed = seed;
      if (vocab_path.empty()) vocab_path = out_path(cfg, "vocab.json");
      return cmd_align_finetune(cfg, vocab_path, init_path, out, distance_report);
    }
    if (app.got_subcommand(c_aug)) return cmd_augment(dataset, translations, out);
    if (app.got_subcommand(c_tune)) {
      auto cfg = load_config(config_path);
      if (tune_seed->count() > 0) cfg.seed = seed;
      if (vocab_path.empty()) vocab_path = out_path(cfg, "vocab.json");
      return cmd_task_tune(cfg, vocab_path, dataset, init_path, out);
    }
    if (app.got_subcommand(c_pred)) return cmd_predict(model_path, vocab_path, dataset, out);
    if (app.got_subcommand(c_eval)) return cmd_evaluate(preds_a, golds_path, out);
    if (app.got_subcommand(c_sig)) {
      return cmd_significance(preds_a, preds_b, golds_path, metric, resamples, seed, out);
    }
    if (app.got_subcommand(c_cross)) return cmd_crosstab(preds_a, preds_b, golds_path, out);
    if (app.got_subcommand(c_grad)) return cmd_gradcheck(seed, trials, max_coords);
    if (app.got_subcommand(c_report)) return cmd_report(report_path, format_name, out);
  } catch (const xlqa::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
