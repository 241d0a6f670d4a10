#include "xlqa/encoder.hpp"

#include <cmath>

#include "xlqa/checkpoint.hpp"
#include "xlqa/errors.hpp"
#include "xlqa/rng.hpp"

namespace xlqa::encoder {

void EncoderConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw input_error(std::string("encoder config: ") + name + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(hidden_dim, "hidden_dim");
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(ffn_dim, "ffn_dim");
  positive(max_seq_len, "max_seq_len");
  if (hidden_dim % num_heads != 0) {
    throw input_error("encoder config: hidden_dim must be divisible by num_heads");
  }
  if (max_seq_len < 2) throw input_error("encoder config: max_seq_len must be >= 2");
}

EncoderParams init_params(const EncoderConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int h = config.hidden_dim;

  auto uniform_matrix = [&](int rows, int cols, double scale) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
    }
    return m;
  };
  auto xavier = [&](int rows, int cols) {
    return uniform_matrix(rows, cols, std::sqrt(6.0 / (rows + cols)));
  };

  EncoderParams params;
  params.config = config;
  const double embed_scale = 1.0 / std::sqrt(static_cast<double>(h));
  params.tok_embed = uniform_matrix(config.vocab_size, h, embed_scale);
  params.pos_embed = uniform_matrix(config.max_seq_len, h, embed_scale);
  params.layers.resize(config.num_layers);
  for (auto& layer : params.layers) {
    layer.wq = xavier(h, h);
    layer.bq = Matrix::Zero(1, h);
    layer.wk = xavier(h, h);
    layer.bk = Matrix::Zero(1, h);
    layer.wv = xavier(h, h);
    layer.bv = Matrix::Zero(1, h);
    layer.wo = xavier(h, h);
    layer.bo = Matrix::Zero(1, h);
    layer.ln1_gamma = Matrix::Ones(1, h);
    layer.ln1_beta = Matrix::Zero(1, h);
    layer.w1 = xavier(h, config.ffn_dim);
    layer.b1 = Matrix::Zero(1, config.ffn_dim);
    layer.w2 = xavier(config.ffn_dim, h);
    layer.b2 = Matrix::Zero(1, h);
    layer.ln2_gamma = Matrix::Ones(1, h);
    layer.ln2_beta = Matrix::Zero(1, h);
  }
  return params;
}

ParamsSnapshot snapshot(const EncoderParams& params) { return ParamsSnapshot(params); }

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams out;
  out.config = params.config;
  out.tok_embed = Matrix::Zero(params.tok_embed.rows(), params.tok_embed.cols());
  out.pos_embed = Matrix::Zero(params.pos_embed.rows(), params.pos_embed.cols());
  out.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& src = params.layers[l];
    auto& dst = out.layers[l];
    auto z = [](const Matrix& m) { return Matrix::Zero(m.rows(), m.cols()).eval(); };
    dst.wq = z(src.wq);
    dst.bq = z(src.bq);
    dst.wk = z(src.wk);
    dst.bk = z(src.bk);
    dst.wv = z(src.wv);
    dst.bv = z(src.bv);
    dst.wo = z(src.wo);
    dst.bo = z(src.bo);
    dst.ln1_gamma = z(src.ln1_gamma);
    dst.ln1_beta = z(src.ln1_beta);
    dst.w1 = z(src.w1);
    dst.b1 = z(src.b1);
    dst.w2 = z(src.w2);
    dst.b2 = z(src.b2);
    dst.ln2_gamma = z(src.ln2_gamma);
    dst.ln2_beta = z(src.ln2_beta);
  }
  return out;
}

void add_into(EncoderParams& into, const EncoderParams& other) {
  std::vector<Matrix*> a, b;
  for_each_tensor(into, [&](const std::string&, Matrix& m) { a.push_back(&m); });
  for_each_tensor(const_cast<EncoderParams&>(other),
                  [&](const std::string&, Matrix& m) { b.push_back(&m); });
  if (a.size() != b.size()) throw contract_error("add_into: parameter layouts differ");
  for (std::size_t i = 0; i < a.size(); ++i) *a[i] += *b[i];
}

void scale_inplace(EncoderParams& params, double factor) {
  for_each_tensor(params, [&](const std::string&, Matrix& m) { m *= factor; });
}

EncoderLeaves make_leaves(Tape& tape, const EncoderParams& params, bool trainable) {
  EncoderLeaves leaves;
  leaves.tok_embed = tape.leaf(params.tok_embed, trainable);
  leaves.pos_embed = tape.leaf(params.pos_embed, trainable);
  for (const auto& layer : params.layers) {
    LayerLeaves l;
    l.wq = tape.leaf(layer.wq, trainable);
    l.bq = tape.leaf(layer.bq, trainable);
    l.wk = tape.leaf(layer.wk, trainable);
    l.bk = tape.leaf(layer.bk, trainable);
    l.wv = tape.leaf(layer.wv, trainable);
    l.bv = tape.leaf(layer.bv, trainable);
    l.wo = tape.leaf(layer.wo, trainable);
    l.bo = tape.leaf(layer.bo, trainable);
    l.ln1_gamma = tape.leaf(layer.ln1_gamma, trainable);
    l.ln1_beta = tape.leaf(layer.ln1_beta, trainable);
    l.w1 = tape.leaf(layer.w1, trainable);
    l.b1 = tape.leaf(layer.b1, trainable);
    l.w2 = tape.leaf(layer.w2, trainable);
    l.b2 = tape.leaf(layer.b2, trainable);
    l.ln2_gamma = tape.leaf(layer.ln2_gamma, trainable);
    l.ln2_beta = tape.leaf(layer.ln2_beta, trainable);
    leaves.layers.push_back(l);
  }
  return leaves;
}

std::vector<Value> encode_on_tape(Tape& tape, const EncoderLeaves& leaves,
                                  const EncoderConfig& config, std::span<const int> ids) {
  const int n = static_cast<int>(ids.size());
  if (n > config.max_seq_len) {
    throw input_error("encode: input length " + std::to_string(n) + " exceeds max_seq_len " +
                      std::to_string(config.max_seq_len));
  }
  std::vector<int> tok_idx(ids.begin(), ids.end());
  for (const int id : tok_idx) {
    if (id < 0 || id >= config.vocab_size) {
      throw input_error("encode: subword id " + std::to_string(id) + " outside vocabulary");
    }
  }
  std::vector<int> pos_idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pos_idx[static_cast<std::size_t>(i)] = i;

  Value x = tape.add(tape.rows(leaves.tok_embed, std::move(tok_idx)),
                     tape.rows(leaves.pos_embed, std::move(pos_idx)));
  std::vector<Value> activations;
  activations.push_back(x);

  const int head_dim = config.hidden_dim / config.num_heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  for (const auto& l : leaves.layers) {
    const Value q = tape.add_rowvec(tape.matmul(x, l.wq), l.bq);
    const Value k = tape.add_rowvec(tape.matmul(x, l.wk), l.bk);
    const Value v = tape.add_rowvec(tape.matmul(x, l.wv), l.bv);
    std::vector<Value> heads;
    heads.reserve(static_cast<std::size_t>(config.num_heads));
    for (int hh = 0; hh < config.num_heads; ++hh) {
      const int off = hh * head_dim;
      const Value qh = tape.slice_cols(q, off, head_dim);
      const Value kh = tape.slice_cols(k, off, head_dim);
      const Value vh = tape.slice_cols(v, off, head_dim);
      const Value att = tape.softmax_rows(tape.scale(tape.matmul_nt(qh, kh), att_scale));
      heads.push_back(tape.matmul(att, vh));
    }
    const Value mixed = tape.add_rowvec(tape.matmul(tape.concat_cols(heads), l.wo), l.bo);
    const Value x1 = tape.layer_norm(tape.add(x, mixed), l.ln1_gamma, l.ln1_beta);
    const Value ff = tape.add_rowvec(
        tape.matmul(tape.gelu(tape.add_rowvec(tape.matmul(x1, l.w1), l.b1)), l.w2), l.b2);
    x = tape.layer_norm(tape.add(x1, ff), l.ln2_gamma, l.ln2_beta);
    activations.push_back(x);
  }
  return activations;
}

Value word_pool_on_tape(Tape& tape, Value token_vectors,
                        std::vector<std::pair<int, int>> word_ranges) {
  return tape.mean_rows_ranges(token_vectors, std::move(word_ranges));
}

int resolve_layer(const EncoderConfig& config, int layer) {
  if (layer == -1) return config.num_layers;
  if (layer < 0 || layer > config.num_layers) {
    throw input_error("layer index " + std::to_string(layer) + " outside [0, " +
                      std::to_string(config.num_layers) + "]");
  }
  return layer;
}

Matrix encode(const EncoderParams& params, std::span<const int> ids, int layer) {
  Tape tape;
  const EncoderLeaves leaves = make_leaves(tape, params, false);
  const auto activations = encode_on_tape(tape, leaves, params.config, ids);
  return tape.value(activations[static_cast<std::size_t>(resolve_layer(params.config, layer))]);
}

Matrix word_pool(const Matrix& token_vectors,
                 const std::vector<std::pair<int, int>>& word_ranges) {
  Tape tape;
  const Value x = tape.constant(token_vectors);
  return tape.value(tape.mean_rows_ranges(x, word_ranges));
}

EncoderParams collect_grads(const Tape& tape, const EncoderLeaves& leaves,
                            const EncoderConfig& config) {
  EncoderParams grads;
  grads.config = config;
  grads.tok_embed = tape.grad(leaves.tok_embed);
  grads.pos_embed = tape.grad(leaves.pos_embed);
  grads.layers.resize(leaves.layers.size());
  for (std::size_t l = 0; l < leaves.layers.size(); ++l) {
    const auto& src = leaves.layers[l];
    auto& dst = grads.layers[l];
    dst.wq = tape.grad(src.wq);
    dst.bq = tape.grad(src.bq);
    dst.wk = tape.grad(src.wk);
    dst.bk = tape.grad(src.bk);
    dst.wv = tape.grad(src.wv);
    dst.bv = tape.grad(src.bv);
    dst.wo = tape.grad(src.wo);
    dst.bo = tape.grad(src.bo);
    dst.ln1_gamma = tape.grad(src.ln1_gamma);
    dst.ln1_beta = tape.grad(src.ln1_beta);
    dst.w1 = tape.grad(src.w1);
    dst.b1 = tape.grad(src.b1);
    dst.w2 = tape.grad(src.w2);
    dst.b2 = tape.grad(src.b2);
    dst.ln2_gamma = tape.grad(src.ln2_gamma);
    dst.ln2_beta = tape.grad(src.ln2_beta);
  }
  return grads;
}

namespace {

nlohmann::json config_to_json(const EncoderConfig& c) {
  return {{"vocab_size", c.vocab_size},   {"hidden_dim", c.hidden_dim},
          {"num_layers", c.num_layers},   {"num_heads", c.num_heads},
          {"ffn_dim", c.ffn_dim},         {"max_seq_len", c.max_seq_len},
          {"seed", c.seed}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& params) {
  std::vector<std::pair<std::string, const Matrix*>> tensors;
  for_each_tensor(const_cast<EncoderParams&>(params),
                  [&](const std::string& name, Matrix& m) { tensors.emplace_back(name, &m); });
  checkpoint::write_container(path, "encoder", config_to_json(params.config), tensors);
}

EncoderParams load_checkpoint(const std::string& path) {
  const auto container = checkpoint::read_container(path, "encoder");
  const EncoderConfig config = config_from_json(container.meta);
  config.validate();
  EncoderParams params = zeros_like([&] {
    EncoderParams shape;
    shape.config = config;
    shape.tok_embed = Matrix(config.vocab_size, config.hidden_dim);
    shape.pos_embed = Matrix(config.max_seq_len, config.hidden_dim);
    shape.layers.resize(config.num_layers);
    for (auto& l : shape.layers) {
      l.wq = l.wk = l.wv = l.wo = Matrix(config.hidden_dim, config.hidden_dim);
      l.bq = l.bk = l.bv = l.bo = Matrix(1, config.hidden_dim);
      l.ln1_gamma = l.ln1_beta = l.ln2_gamma = l.ln2_beta = Matrix(1, config.hidden_dim);
      l.w1 = Matrix(config.hidden_dim, config.ffn_dim);
      l.b1 = Matrix(1, config.ffn_dim);
      l.w2 = Matrix(config.ffn_dim, config.hidden_dim);
      l.b2 = Matrix(1, config.hidden_dim);
    }
    return shape;
  }());
  for_each_tensor(params, [&](const std::string& name, Matrix& m) {
    const Matrix& stored = container.tensor(name);
    if (stored.rows() != m.rows() || stored.cols() != m.cols()) {
      throw format_error("checkpoint " + path + ": tensor '" + name + "' has shape " +
                         std::to_string(stored.rows()) + "x" + std::to_string(stored.cols()) +
                         ", config implies " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
    }
    m = stored;
  });
  return params;
}

}  // namespace xlqa::encoder
