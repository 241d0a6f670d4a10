#ifndef XLQA_ENCODER_HPP
#define XLQA_ENCODER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xlqa/autodiff.hpp"

namespace xlqa::encoder {

using autodiff::Matrix;
using autodiff::Tape;
using autodiff::Value;

struct EncoderConfig {
  int vocab_size = 0;
  int hidden_dim = 0;
  int num_layers = 0;
  int num_heads = 0;
  int ffn_dim = 0;
  int max_seq_len = 0;
  std::uint64_t seed = 0;

  void validate() const;  // throws input_error
  bool operator==(const EncoderConfig&) const = default;
};

struct LayerParams {
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix ln1_gamma, ln1_beta;
  Matrix w1, b1, w2, b2;
  Matrix ln2_gamma, ln2_beta;
};

struct EncoderParams {
  EncoderConfig config;
  Matrix tok_embed;  // vocab_size x hidden_dim
  Matrix pos_embed;  // max_seq_len x hidden_dim
  std::vector<LayerParams> layers;
};

// Deep immutable copy of the parameters at a point in time.
class ParamsSnapshot {
 public:
  explicit ParamsSnapshot(const EncoderParams& source) : params_(source) {}
  const EncoderParams& params() const { return params_; }

 private:
  EncoderParams params_;
};

// Seeded deterministic init: scaled uniform matrices, zero biases, unit
// layer-norm scales.
EncoderParams init_params(const EncoderConfig& config);

ParamsSnapshot snapshot(const EncoderParams& params);

// Visits every tensor as (name, Matrix&) in a fixed order shared by init,
// checkpointing, updates and gradient collection.
template <typename Params, typename Fn>
void for_each_tensor(Params& params, Fn&& fn) {
  fn("tok_embed", params.tok_embed);
  fn("pos_embed", params.pos_embed);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    fn(p + "wq", layer.wq);
    fn(p + "bq", layer.bq);
    fn(p + "wk", layer.wk);
    fn(p + "bk", layer.bk);
    fn(p + "wv", layer.wv);
    fn(p + "bv", layer.bv);
    fn(p + "wo", layer.wo);
    fn(p + "bo", layer.bo);
    fn(p + "ln1_gamma", layer.ln1_gamma);
    fn(p + "ln1_beta", layer.ln1_beta);
    fn(p + "w1", layer.w1);
    fn(p + "b1", layer.b1);
    fn(p + "w2", layer.w2);
    fn(p + "b2", layer.b2);
    fn(p + "ln2_gamma", layer.ln2_gamma);
    fn(p + "ln2_beta", layer.ln2_beta);
  }
}

// Parameter-shaped container of zeros (gradient accumulator).
EncoderParams zeros_like(const EncoderParams& params);

// Elementwise in-place arithmetic over whole parameter sets.
void add_into(EncoderParams& into, const EncoderParams& other);
void scale_inplace(EncoderParams& params, double factor);

// Tape-side handles for every parameter tensor.
struct LayerLeaves {
  Value wq, bq, wk, bk, wv, bv, wo, bo;
  Value ln1_gamma, ln1_beta;
  Value w1, b1, w2, b2;
  Value ln2_gamma, ln2_beta;
};

struct EncoderLeaves {
  Value tok_embed, pos_embed;
  std::vector<LayerLeaves> layers;
};

EncoderLeaves make_leaves(Tape& tape, const EncoderParams& params, bool trainable);

// Forward pass on the tape. Returns num_layers + 1 activations: index 0 is
// the embedding sum, index L the output of layer L.
std::vector<Value> encode_on_tape(Tape& tape, const EncoderLeaves& leaves,
                                  const EncoderConfig& config, std::span<const int> ids);

Value word_pool_on_tape(Tape& tape, Value token_vectors,
                        std::vector<std::pair<int, int>> word_ranges);

// Plain (tape-discarding) forward. layer == -1 selects the final layer.
Matrix encode(const EncoderParams& params, std::span<const int> ids, int layer = -1);

Matrix word_pool(const Matrix& token_vectors,
                 const std::vector<std::pair<int, int>>& word_ranges);

// Reads accumulated parameter gradients off a backpropagated tape.
EncoderParams collect_grads(const Tape& tape, const EncoderLeaves& leaves,
                            const EncoderConfig& config);

// Maps align_layer in [-1, num_layers] to an index into encode_on_tape's
// output; -1 means the final layer.
int resolve_layer(const EncoderConfig& config, int layer);

// Versioned binary checkpoint; write then read is bit-exact.
void save_checkpoint(const std::string& path, const EncoderParams& params);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace xlqa::encoder

#endif  // XLQA_ENCODER_HPP
