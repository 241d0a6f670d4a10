// Python bindings for the core operations: tokenization and vocabularies,
// IBM-1 alignment, the trainable encoder, alignment fine-tuning, QA
// task-tuning/prediction and the evaluation metrics.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xlqa/aligner.hpp"
#include "xlqa/alignft.hpp"
#include "xlqa/corpus.hpp"
#include "xlqa/encoder.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/evalsig.hpp"
#include "xlqa/gradcheck.hpp"
#include "xlqa/qatask.hpp"

namespace py = pybind11;
using namespace xlqa;

namespace {

std::vector<std::pair<int, int>> links_of(const aligner::AlignmentSet& set) {
  std::vector<std::pair<int, int>> out;
  out.reserve(set.links.size());
  for (const auto& [p, q] : set.links) out.emplace_back(p, q);
  return out;
}

aligner::AlignmentSet set_of(const std::vector<std::pair<int, int>>& links) {
  aligner::AlignmentSet set;
  for (const auto& [p, q] : links) set.add({p, q});
  return set;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cross-lingual extractive QA toolkit (C++ core)";

  py::register_exception<input_error>(m, "InputError");
  py::register_exception<format_error>(m, "FormatError");
  py::register_exception<contract_error>(m, "ContractError");

  // corpus ------------------------------------------------------------
  py::class_<corpus::WordToken>(m, "WordToken")
      .def(py::init<>())
      .def_readwrite("surface", &corpus::WordToken::surface)
      .def_readwrite("byte_start", &corpus::WordToken::byte_start)
      .def_readwrite("byte_end", &corpus::WordToken::byte_end)
      .def_readwrite("subword_ids", &corpus::WordToken::subword_ids)
      .def("__repr__", [](const corpus::WordToken& t) {
        return "WordToken('" + t.surface + "', " + std::to_string(t.byte_start) + ", " +
               std::to_string(t.byte_end) + ")";
      });

  py::class_<corpus::Sentence>(m, "Sentence")
      .def(py::init<>())
      .def_readwrite("language", &corpus::Sentence::language)
      .def_readwrite("raw_text", &corpus::Sentence::raw_text)
      .def_readwrite("tokens", &corpus::Sentence::tokens);

  py::class_<corpus::ParallelCorpus>(m, "ParallelCorpus")
      .def(py::init<>())
      .def_readwrite("source_lang", &corpus::ParallelCorpus::source_lang)
      .def_readwrite("target_lang", &corpus::ParallelCorpus::target_lang)
      .def_readwrite("pairs", &corpus::ParallelCorpus::pairs);

  py::class_<corpus::Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def("size", &corpus::Vocabulary::size)
      .def("id_of", &corpus::Vocabulary::id_of)
      .def("token_of", &corpus::Vocabulary::token_of)
      .def("merges", &corpus::Vocabulary::merges)
      .def("encode_word", [](const corpus::Vocabulary& v, const std::string& w) {
        return v.encode_word(w);
      })
      .def("save", &corpus::Vocabulary::save)
      .def_static("load", &corpus::Vocabulary::load)
      .def_readonly_static("PAD", &corpus::Vocabulary::kPad)
      .def_readonly_static("UNK", &corpus::Vocabulary::kUnk)
      .def_readonly_static("CLS", &corpus::Vocabulary::kCls)
      .def_readonly_static("SEP", &corpus::Vocabulary::kSep);

  py::enum_<corpus::MinimalAnswer::Kind>(m, "AnswerKind")
      .value("SPAN", corpus::MinimalAnswer::Kind::Span)
      .value("YES", corpus::MinimalAnswer::Kind::Yes)
      .value("NO", corpus::MinimalAnswer::Kind::No)
      .value("NULL", corpus::MinimalAnswer::Kind::Null);

  py::class_<corpus::MinimalAnswer>(m, "MinimalAnswer")
      .def(py::init<>())
      .def_readwrite("kind", &corpus::MinimalAnswer::kind)
      .def_readwrite("span_start", &corpus::MinimalAnswer::span_start)
      .def_readwrite("span_end", &corpus::MinimalAnswer::span_end);

  py::class_<corpus::QAExample>(m, "QAExample")
      .def(py::init<>())
      .def_readwrite("id", &corpus::QAExample::id)
      .def_readwrite("question_lang", &corpus::QAExample::question_lang)
      .def_readwrite("context_lang", &corpus::QAExample::context_lang)
      .def_readwrite("question", &corpus::QAExample::question)
      .def_readwrite("context", &corpus::QAExample::context)
      .def_readwrite("passages", &corpus::QAExample::passages)
      .def_readwrite("gold_passage", &corpus::QAExample::gold_passage)
      .def_readwrite("gold_minimal", &corpus::QAExample::gold_minimal);

  py::class_<corpus::Translation>(m, "Translation")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string lang, std::string question) {
             return corpus::Translation{std::move(id), std::move(lang), std::move(question)};
           }),
           py::arg("id"), py::arg("lang"), py::arg("question"))
      .def_readwrite("id", &corpus::Translation::id)
      .def_readwrite("lang", &corpus::Translation::lang)
      .def_readwrite("question", &corpus::Translation::question);

  m.def("tokenize", [](const std::string& text) { return corpus::tokenize(text); });
  m.def("make_sentence", &corpus::make_sentence);
  m.def("build_vocab", &corpus::build_vocab, py::arg("corpora"), py::arg("merge_count"));
  m.def("encode_subwords", &corpus::encode_subwords);
  m.def("encode_sentence", &corpus::encode_sentence);
  m.def("flatten_subwords", &corpus::flatten_subwords);
  m.def("load_parallel", &corpus::load_parallel);
  m.def("validate_example", &corpus::validate_example);
  m.def("load_qa_dataset", &corpus::load_qa_dataset);
  m.def("save_qa_dataset", &corpus::save_qa_dataset);
  m.def("load_translations", &corpus::load_translations);
  m.def("save_translations", &corpus::save_translations);
  m.def(
      "augment_crosslingual",
      [](const std::vector<corpus::QAExample>& examples,
         const std::vector<corpus::Translation>& translations) {
        std::vector<std::string> warnings;
        auto out = corpus::augment_crosslingual(examples, translations, &warnings);
        return py::make_tuple(std::move(out), std::move(warnings));
      },
      py::arg("examples"), py::arg("translations"),
      "returns (augmented examples, warnings)");

  // aligner -----------------------------------------------------------
  py::class_<aligner::AlignmentSet>(m, "AlignmentSet")
      .def(py::init<>())
      .def(py::init([](const std::vector<std::pair<int, int>>& links) { return set_of(links); }),
           py::arg("links"))
      .def("add", [](aligner::AlignmentSet& s, int p, int q) { s.add({p, q}); })
      .def("contains",
           [](const aligner::AlignmentSet& s, int p, int q) { return s.contains({p, q}); })
      .def("links", &links_of)
      .def("__len__", [](const aligner::AlignmentSet& s) { return s.links.size(); })
      .def("__eq__", [](const aligner::AlignmentSet& a, const aligner::AlignmentSet& b) {
        return a == b;
      });

  py::class_<aligner::TranslationTable>(m, "TranslationTable")
      .def(py::init<>())
      .def("prob", &aligner::TranslationTable::prob)
      .def("set_prob", &aligner::TranslationTable::set_prob)
      .def("has_null", &aligner::TranslationTable::has_null)
      .def("source_words", &aligner::TranslationTable::source_words)
      .def("row", &aligner::TranslationTable::row)
      .def("save_tsv", &aligner::TranslationTable::save_tsv)
      .def_static("load_tsv", &aligner::TranslationTable::load_tsv)
      .def_property_readonly_static("NULL_WORD", [](py::object) {
        return std::string(aligner::TranslationTable::kNullWord);
      });

  m.def(
      "train_ibm1",
      [](const corpus::ParallelCorpus& c, int iterations, bool use_null) {
        auto result = aligner::train_ibm1(c, iterations, use_null);
        return py::make_tuple(std::move(result.table), std::move(result.log_likelihood));
      },
      py::arg("corpus"), py::arg("iterations"), py::arg("use_null") = true,
      "returns (table, per-iteration log-likelihood)");
  m.def("extract_alignments", &aligner::extract_alignments, py::arg("table"), py::arg("source"),
        py::arg("target"), py::arg("threshold") = std::nullopt);
  m.def("symmetrize", &aligner::symmetrize);
  m.def("read_pharaoh", &aligner::read_pharaoh);
  m.def("write_pharaoh", &aligner::write_pharaoh);

  // encoder -----------------------------------------------------------
  py::class_<encoder::EncoderConfig>(m, "EncoderConfig")
      .def(py::init<>())
      .def_readwrite("vocab_size", &encoder::EncoderConfig::vocab_size)
      .def_readwrite("hidden_dim", &encoder::EncoderConfig::hidden_dim)
      .def_readwrite("num_layers", &encoder::EncoderConfig::num_layers)
      .def_readwrite("num_heads", &encoder::EncoderConfig::num_heads)
      .def_readwrite("ffn_dim", &encoder::EncoderConfig::ffn_dim)
      .def_readwrite("max_seq_len", &encoder::EncoderConfig::max_seq_len)
      .def_readwrite("seed", &encoder::EncoderConfig::seed)
      .def("validate", &encoder::EncoderConfig::validate);

  py::class_<encoder::EncoderParams>(m, "EncoderParams")
      .def_readonly("config", &encoder::EncoderParams::config);

  py::class_<encoder::ParamsSnapshot>(m, "ParamsSnapshot")
      .def_property_readonly("params", &encoder::ParamsSnapshot::params,
                             py::return_value_policy::reference_internal);

  m.def("init_params", &encoder::init_params);
  m.def("snapshot", &encoder::snapshot);
  m.def(
      "encode",
      [](const encoder::EncoderParams& params, const std::vector<int>& ids, int layer) {
        return encoder::encode(params, ids, layer);
      },
      py::arg("params"), py::arg("ids"), py::arg("layer") = -1);
  m.def("word_pool", [](const autodiff::Matrix& vectors,
                        const std::vector<std::pair<int, int>>& ranges) {
    return encoder::word_pool(vectors, ranges);
  });
  m.def("save_checkpoint", &encoder::save_checkpoint);
  m.def("load_checkpoint", &encoder::load_checkpoint);

  // alignft -----------------------------------------------------------
  py::enum_<alignft::Sampling>(m, "Sampling")
      .value("PROPORTIONAL", alignft::Sampling::Proportional)
      .value("UNIFORM_PER_CORPUS", alignft::Sampling::UniformPerCorpus);

  py::enum_<alignft::Optimizer>(m, "Optimizer")
      .value("SGD", alignft::Optimizer::Sgd)
      .value("ADAM", alignft::Optimizer::Adam);

  py::class_<alignft::AlignTrainConfig>(m, "AlignTrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &alignft::AlignTrainConfig::learning_rate)
      .def_readwrite("epochs", &alignft::AlignTrainConfig::epochs)
      .def_readwrite("batch_size", &alignft::AlignTrainConfig::batch_size)
      .def_readwrite("seed", &alignft::AlignTrainConfig::seed)
      .def_readwrite("sampling", &alignft::AlignTrainConfig::sampling)
      .def_readwrite("align_layer", &alignft::AlignTrainConfig::align_layer)
      .def_readwrite("lambda_", &alignft::AlignTrainConfig::lambda)
      .def_readwrite("optimizer", &alignft::AlignTrainConfig::optimizer);

  py::class_<alignft::AlignedCorpus>(m, "AlignedCorpus")
      .def(py::init<>())
      .def_readwrite("bitext", &alignft::AlignedCorpus::bitext)
      .def_readwrite("alignments", &alignft::AlignedCorpus::alignments);

  py::class_<alignft::AlignedPair>(m, "AlignedPair")
      .def(py::init<>())
      .def_readwrite("source", &alignft::AlignedPair::source)
      .def_readwrite("target", &alignft::AlignedPair::target)
      .def_readwrite("links", &alignft::AlignedPair::links)
      .def_readwrite("corpus_index", &alignft::AlignedPair::corpus_index);

  py::class_<alignft::TrainResult>(m, "AlignTrainResult")
      .def_readonly("params", &alignft::TrainResult::params)
      .def_readonly("initial", &alignft::TrainResult::initial)
      .def_readonly("epoch_objective", &alignft::TrainResult::epoch_objective)
      .def_readonly("pairs_skipped", &alignft::TrainResult::pairs_skipped);

  py::class_<alignft::PairDistanceReport>(m, "PairDistanceReport")
      .def_readonly("mean_aligned_distance", &alignft::PairDistanceReport::mean_aligned_distance)
      .def_readonly("mean_random_distance", &alignft::PairDistanceReport::mean_random_distance)
      .def_readonly("mean_drift", &alignft::PairDistanceReport::mean_drift)
      .def_readonly("pairs_used", &alignft::PairDistanceReport::pairs_used)
      .def_readonly("links_used", &alignft::PairDistanceReport::links_used);

  m.def("alignment_loss", &alignft::alignment_loss);
  m.def("regularization_loss", &alignft::regularization_loss);
  m.def("total_objective", &alignft::total_objective, py::arg("params"), py::arg("initial"),
        py::arg("vocab"), py::arg("batch"), py::arg("align_layer") = -1,
        py::arg("lambda_") = 1.0);
  m.def("train_alignment", &alignft::train_alignment);
  m.def("pair_distance_report", &alignft::pair_distance_report, py::arg("params"),
        py::arg("initial"), py::arg("vocab"), py::arg("pairs"), py::arg("align_layer") = -1,
        py::arg("seed") = 1);
  m.def("flatten_corpora", &alignft::flatten_corpora);

  // qatask ------------------------------------------------------------
  py::class_<qatask::QAModel>(m, "QAModel")
      .def_readonly("enc", &qatask::QAModel::enc)
      .def_readwrite("max_span_subwords", &qatask::QAModel::max_span_subwords);

  py::class_<qatask::ModelInput>(m, "ModelInput")
      .def_readonly("ids", &qatask::ModelInput::ids)
      .def_readonly("word_ranges", &qatask::ModelInput::word_ranges)
      .def_property_readonly("offsets", [](const qatask::ModelInput& input) {
        std::vector<std::tuple<int, std::size_t, std::size_t>> out;
        for (const auto& e : input.offsets) out.emplace_back(e.position, e.byte_start, e.byte_end);
        return out;
      });

  py::class_<qatask::QATuneConfig>(m, "QATuneConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &qatask::QATuneConfig::learning_rate)
      .def_readwrite("epochs", &qatask::QATuneConfig::epochs)
      .def_readwrite("batch_size", &qatask::QATuneConfig::batch_size)
      .def_readwrite("seed", &qatask::QATuneConfig::seed)
      .def_readwrite("optimizer", &qatask::QATuneConfig::optimizer);

  py::class_<qatask::QAPrediction>(m, "QAPrediction")
      .def(py::init<>())
      .def_readwrite("id", &qatask::QAPrediction::id)
      .def_readwrite("passage_pred", &qatask::QAPrediction::passage_pred)
      .def_readwrite("passage_score", &qatask::QAPrediction::passage_score)
      .def_readwrite("minimal_pred", &qatask::QAPrediction::minimal_pred)
      .def_readwrite("minimal_score", &qatask::QAPrediction::minimal_score);

  py::class_<qatask::PassageScores>(m, "PassageScores")
      .def_readonly("scores", &qatask::PassageScores::scores)
      .def_readonly("null_score", &qatask::PassageScores::null_score)
      .def_readonly("best", &qatask::PassageScores::best);

  py::class_<qatask::MinimalDecision>(m, "MinimalDecision")
      .def_readonly("answer", &qatask::MinimalDecision::answer)
      .def_readonly("score", &qatask::MinimalDecision::score);

  py::class_<qatask::TuneResult>(m, "TuneResult")
      .def_readonly("model", &qatask::TuneResult::model)
      .def_readonly("loss_trace", &qatask::TuneResult::loss_trace);

  m.def("init_qa_model", &qatask::init_qa_model);
  m.def("build_model_input", &qatask::build_model_input);
  m.def("score_passages", &qatask::score_passages);
  m.def("score_minimal", &qatask::score_minimal);
  m.def("task_tune", &qatask::task_tune);
  m.def("predict", &qatask::predict);
  m.def("save_qa_model", &qatask::save_qa_model);
  m.def("load_qa_model", &qatask::load_qa_model);
  m.def("save_predictions", &qatask::save_predictions);
  m.def("load_predictions", &qatask::load_predictions);

  // evalsig -----------------------------------------------------------
  py::class_<evalsig::PRF>(m, "PRF")
      .def_readonly("precision", &evalsig::PRF::precision)
      .def_readonly("recall", &evalsig::PRF::recall)
      .def_readonly("f1", &evalsig::PRF::f1)
      .def("__repr__", [](const evalsig::PRF& p) {
        return "PRF(precision=" + std::to_string(p.precision) +
               ", recall=" + std::to_string(p.recall) + ", f1=" + std::to_string(p.f1) + ")";
      });

  py::enum_<evalsig::Metric>(m, "Metric")
      .value("PASSAGE", evalsig::Metric::Passage)
      .value("MINIMAL", evalsig::Metric::Minimal);

  py::enum_<evalsig::ReportFormat>(m, "ReportFormat")
      .value("TSV", evalsig::ReportFormat::Tsv)
      .value("MARKDOWN", evalsig::ReportFormat::Markdown);

  py::class_<evalsig::SignificanceResult>(m, "SignificanceResult")
      .def_readonly("p_value", &evalsig::SignificanceResult::p_value)
      .def_readonly("win_fraction", &evalsig::SignificanceResult::win_fraction)
      .def_readonly("resamples", &evalsig::SignificanceResult::resamples)
      .def_readonly("seed", &evalsig::SignificanceResult::seed);

  py::class_<evalsig::CrosstabCounts>(m, "CrosstabCounts")
      .def_readonly("both_correct", &evalsig::CrosstabCounts::both_correct)
      .def_readonly("x_correct_y_wrong", &evalsig::CrosstabCounts::x_correct_y_wrong)
      .def_readonly("x_wrong_y_correct", &evalsig::CrosstabCounts::x_wrong_y_correct)
      .def_readonly("both_wrong", &evalsig::CrosstabCounts::both_wrong)
      .def_readonly("excluded", &evalsig::CrosstabCounts::excluded);

  py::class_<evalsig::EvalCell>(m, "EvalCell")
      .def_readonly("question_lang", &evalsig::EvalCell::question_lang)
      .def_readonly("context_lang", &evalsig::EvalCell::context_lang)
      .def_readonly("passage_f1", &evalsig::EvalCell::passage_f1)
      .def_readonly("minimal_f1", &evalsig::EvalCell::minimal_f1)
      .def_readonly("count", &evalsig::EvalCell::count);

  py::class_<evalsig::EvalRow>(m, "EvalRow")
      .def_readonly("question_lang", &evalsig::EvalRow::question_lang)
      .def_readonly("cells", &evalsig::EvalRow::cells)
      .def_readonly("avg_passage_f1", &evalsig::EvalRow::avg_passage_f1)
      .def_readonly("avg_minimal_f1", &evalsig::EvalRow::avg_minimal_f1);

  py::class_<evalsig::EvalReport>(m, "EvalReport").def_readonly("rows", &evalsig::EvalReport::rows);

  m.def("passage_f1", &evalsig::passage_f1);
  m.def("span_f1", &evalsig::span_f1);
  m.def("minimal_answer_f1", &evalsig::minimal_answer_f1);
  m.def("per_example_minimal_score", &evalsig::per_example_minimal_score);
  m.def("bootstrap_significance", &evalsig::bootstrap_significance, py::arg("preds_a"),
        py::arg("preds_b"), py::arg("golds"), py::arg("metric"), py::arg("resamples") = 1000,
        py::arg("seed") = 1);
  m.def("crosstab_correctness", &evalsig::crosstab_correctness);
  m.def("build_report", &evalsig::build_report);
  m.def("render_report", &evalsig::render_report);
  m.def("save_report", &evalsig::save_report);
  m.def("load_report", &evalsig::load_report);

  // gradcheck ---------------------------------------------------------
  m.def(
      "gradcheck",
      [](std::uint64_t seed, int max_coords_per_tensor) {
        const auto result = gradcheck::check_alignment_objective(seed, max_coords_per_tensor);
        return py::make_tuple(result.max_rel_error, result.coords_checked, result.worst_tensor);
      },
      py::arg("seed") = 0, py::arg("max_coords_per_tensor") = 200,
      "returns (max_rel_error, coords_checked, worst_tensor)");
}
