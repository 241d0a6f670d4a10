#include "xlqa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xlqa/alignft.hpp"
#include "xlqa/rng.hpp"

namespace xlqa::gradcheck {

using autodiff::Matrix;

double relative_error(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

namespace {

struct Scenario {
  encoder::EncoderParams params;
  encoder::ParamsSnapshot initial;
  corpus::Vocabulary vocab;
  std::vector<alignft::AlignedPair> batch;
  int align_layer = -1;

  Scenario(encoder::EncoderParams p, const encoder::EncoderParams& init)
      : params(std::move(p)), initial(init) {}
};

std::string random_word(Rng& rng) {
  const int len = 2 + rng.index(4);
  std::string w;
  for (int i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng.index(10)));
  return w;
}

Scenario make_scenario(std::uint64_t seed) {
  Rng rng(seed);

  // Small word inventory and a bitext sampled from it.
  std::vector<std::string> lexicon;
  for (int i = 0; i < 12; ++i) lexicon.push_back(random_word(rng));
  auto random_sentence = [&](const std::string& lang) {
    const int len = 3 + rng.index(4);
    std::string text;
    for (int i = 0; i < len; ++i) {
      if (i > 0) text += ' ';
      text += lexicon[static_cast<std::size_t>(rng.index(lexicon.size()))];
    }
    return corpus::make_sentence(lang, text);
  };

  corpus::ParallelCorpus bitext;
  bitext.source_lang = "xx";
  bitext.target_lang = "yy";
  const int num_pairs = 1 + rng.index(2);
  for (int i = 0; i < num_pairs; ++i) {
    bitext.pairs.emplace_back(random_sentence("xx"), random_sentence("yy"));
  }
  corpus::Vocabulary vocab = corpus::build_vocab({bitext}, 4 + rng.index(6));

  encoder::EncoderConfig config;
  const int head_choices[] = {1, 2, 4};
  const int heads = head_choices[rng.index(3)];
  const int head_dim = 2 + rng.index(3);  // 2..4, so hidden_dim <= 16
  config.hidden_dim = heads * head_dim;
  config.num_heads = heads;
  config.num_layers = 1 + rng.index(2);
  config.ffn_dim = config.hidden_dim * (1 + rng.index(2));
  config.max_seq_len = 48;
  config.vocab_size = vocab.size();
  config.seed = rng.next_u64();

  encoder::EncoderConfig init_config = config;
  init_config.seed = rng.next_u64();  // distinct snapshot so the drift term has signal

  Scenario sc(encoder::init_params(config), encoder::init_params(init_config));
  sc.vocab = std::move(vocab);
  sc.align_layer = rng.index(static_cast<std::size_t>(config.num_layers + 1));

  for (const auto& [src, tgt] : bitext.pairs) {
    alignft::AlignedPair pair;
    pair.source = src;
    pair.target = tgt;
    const int links = 1 + rng.index(std::min(src.tokens.size(), tgt.tokens.size()));
    for (int k = 0; k < links; ++k) {
      pair.links.add({rng.index(src.tokens.size()), rng.index(tgt.tokens.size())});
    }
    sc.batch.push_back(std::move(pair));
  }
  return sc;
}

// Rows of tok_embed that the scenario actually feeds through the encoder.
std::set<int> used_token_rows(const Scenario& sc) {
  std::set<int> used;
  for (const auto& pair : sc.batch) {
    for (const auto* sent : {&pair.source, &pair.target}) {
      for (const auto& tok : sent->tokens) {
        for (const int id : sc.vocab.encode_word(tok.surface)) used.insert(id);
      }
    }
  }
  return used;
}

}  // namespace

Result check_alignment_objective(std::uint64_t seed, int max_coords_per_tensor) {
  Scenario sc = make_scenario(seed);
  const double base_lambda = 1.0;
  const auto [value, grads] = alignft::objective_with_grads(sc.params, sc.initial, sc.vocab,
                                                            sc.batch, sc.align_layer, base_lambda);
  (void)value;

  const std::set<int> used_rows = used_token_rows(sc);
  constexpr double h = 1e-5;
  Rng pick(seed ^ 0x5eedc0de);
  Result result;

  std::vector<Matrix*> tensors;
  std::vector<std::string> names;
  encoder::for_each_tensor(sc.params, [&](const std::string& name, Matrix& m) {
    tensors.push_back(&m);
    names.push_back(name);
  });
  std::vector<const Matrix*> grad_tensors;
  encoder::for_each_tensor(const_cast<encoder::EncoderParams&>(grads),
                           [&](const std::string&, Matrix& m) { grad_tensors.push_back(&m); });

  for (std::size_t t = 0; t < tensors.size(); ++t) {
    Matrix& m = *tensors[t];
    // Candidate coordinates. Unused embedding rows carry exactly zero
    // gradient, so concentrate the token-embedding check on rows the
    // scenario touches.
    std::vector<std::pair<int, int>> coords;
    if (names[t] == "tok_embed") {
      for (const int r : used_rows) {
        for (int c = 0; c < m.cols(); ++c) coords.emplace_back(r, c);
      }
      coords.emplace_back(0, 0);  // one untouched row as a zero check
    } else {
      for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) coords.emplace_back(r, c);
      }
    }
    if (max_coords_per_tensor > 0 && static_cast<int>(coords.size()) > max_coords_per_tensor) {
      shuffle_inplace(coords, pick);
      coords.resize(static_cast<std::size_t>(max_coords_per_tensor));
    }
    for (const auto& [r, c] : coords) {
      const double saved = m(r, c);
      m(r, c) = saved + h;
      const double plus =
          alignft::total_objective(sc.params, sc.initial, sc.vocab, sc.batch, sc.align_layer);
      m(r, c) = saved - h;
      const double minus =
          alignft::total_objective(sc.params, sc.initial, sc.vocab, sc.batch, sc.align_layer);
      m(r, c) = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = (*grad_tensors[t])(r, c);
      const double err = relative_error(analytic, numeric);
      ++result.coords_checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_tensor = names[t];
      }
    }
  }
  return result;
}

}  // namespace xlqa::gradcheck
