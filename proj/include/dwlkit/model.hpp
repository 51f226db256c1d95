#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwlkit/encodings.hpp"

namespace dwlkit {

// Architecture of the link-prediction model. Defaults follow the reference
// hyperparameters (K=32, d_B=50, d_T=100, d=50, 2 layers, 2 heads).
struct ModelConfig {
  std::size_t node_dim = 1;        // d_N
  std::size_t edge_dim = 1;        // d_E
  std::size_t time_dim = 100;      // d_T, even
  std::size_t mite_k = 32;         // K
  std::size_t mite_dim = 50;       // d_B
  std::size_t align_dim = 50;      // d; encoder width is 4d
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t ffn_dim = 0;         // 0 selects 4d
  std::size_t out_dim = 0;         // 0 selects d
  std::size_t patch_size = 1;      // P
  std::size_t neighbor_limit = 32;
  bool use_mite = true;            // false zeroes X_M (ablation)

  std::size_t width() const { return 4 * align_dim; }
  std::size_t ffn_width() const { return ffn_dim == 0 ? width() : ffn_dim; }
  std::size_t output_dim() const { return out_dim == 0 ? align_dim : out_dim; }
  std::size_t head_dim() const { return width() / heads; }
  void validate() const;
};

struct Linear {
  Matrix w;  // in x out
  Matrix b;  // 1 x out
};

struct LayerNormParams {
  Matrix gain;  // 1 x width
  Matrix bias;  // 1 x width
};

struct AttentionHead {
  Matrix wq, wk, wv;  // width x head_dim
  Matrix wo;          // head_dim x width
};

struct EncoderLayer {
  LayerNormParams ln1;
  std::vector<AttentionHead> heads;
  LayerNormParams ln2;
  Linear ffn_in;
  Linear ffn_out;
};

struct ModelParams {
  ModelConfig config;
  Linear mite1;              // 2K -> d_B
  Linear mite2;              // d_B -> d_B
  Matrix time_freq;          // 1 x d_T/2, learnable Fourier frequencies
  Linear align_c, align_e, align_t, align_m;
  std::vector<EncoderLayer> layers;
  Linear out;                // 4d -> d_out
  Linear scorer;             // d_out -> 1

  // Glorot-uniform weights, zero biases, unit layer-norm gains, decade-grid
  // frequencies.
  static ModelParams init(const ModelConfig& config, std::uint64_t seed);
  static ModelParams zeros(const ModelConfig& config);
  ModelParams zeros_like() const;

  template <class F>
  void for_each_block(F&& f) { visit(*this, f); }
  template <class F>
  void for_each_block(F&& f) const { visit(*this, f); }

  std::size_t scalar_count() const;

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f);
};

template <class Self, class F>
void ModelParams::visit(Self& self, F& f) {
  auto linear = [&](const std::string& name, auto& lin) {
    f(name + ".w", lin.w);
    f(name + ".b", lin.b);
  };
  linear("mite1", self.mite1);
  linear("mite2", self.mite2);
  f(std::string("time.freq"), self.time_freq);
  linear("align.C", self.align_c);
  linear("align.E", self.align_e);
  linear("align.T", self.align_t);
  linear("align.M", self.align_m);
  for (std::size_t l = 0; l < self.layers.size(); ++l) {
    auto& layer = self.layers[l];
    const std::string p = "layer" + std::to_string(l);
    f(p + ".ln1.gain", layer.ln1.gain);
    f(p + ".ln1.bias", layer.ln1.bias);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::string hp = p + ".head" + std::to_string(h);
      f(hp + ".wq", layer.heads[h].wq);
      f(hp + ".wk", layer.heads[h].wk);
      f(hp + ".wv", layer.heads[h].wv);
      f(hp + ".wo", layer.heads[h].wo);
    }
    f(p + ".ln2.gain", layer.ln2.gain);
    f(p + ".ln2.bias", layer.ln2.bias);
    linear(p + ".ffn_in", layer.ffn_in);
    linear(p + ".ffn_out", layer.ffn_out);
  }
  linear("out", self.out);
  linear("scorer", self.scorer);
}

class NonFiniteActivation : public std::runtime_error {
 public:
  // layer: -1 for the input embedding, L for the output head.
  NonFiniteActivation(int layer, const std::string& what)
      : std::runtime_error("non-finite activation at layer " + std::to_string(layer) + " (" + what + ")"),
        layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

struct PairOutput {
  Eigen::RowVectorXd embedding;  // h_t(s), d_out
  double logit = 0.0;
  double score = 0.5;            // sigmoid(logit)
};

// Input patches Z = [Z_C || Z_E || Z_T || Z_M] for one bundle, with X_M
// projected by the MITE MLP and X_T rebuilt from the learnable frequencies.
Matrix embed_patches(const ModelParams& params, const EncodingBundle& bundle);
// Encoder stack, mean pooling, output map and scorer.
PairOutput forward_patches(const ModelParams& params, const Matrix& Z);
PairOutput forward(const ModelParams& params, const EncodingBundle& bundle);

struct Example {
  EncodingBundle bundle;
  double label = 0.0;  // 1 for an observed interaction
};

inline constexpr double kProbClamp = 1e-12;

double bce(double p, double label);
// Same loss evaluated from the logit; used by training for accuracy near
// saturated probabilities.
double bce_logit(double logit, double label);

struct LossAndGrad {
  double loss = 0.0;
  ModelParams grad;
};

// Mean BCE over the batch and its gradient by reverse accumulation.
LossAndGrad loss_and_grad(const ModelParams& params, std::span<const Example> batch);
double batch_loss(const ModelParams& params, std::span<const Example> batch);

struct GradSample {
  std::string block;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradReport {
  double epsilon = 0.0;
  std::map<std::string, double> max_rel_error;  // per parameter block
  std::vector<GradSample> samples;              // every probed scalar

  double worst() const;
};

// Central differences against the analytic gradient. Blocks with more than
// max_per_block scalars are probed at evenly strided entries.
GradReport finite_diff_check(const ModelParams& params, std::span<const Example> batch,
                             double epsilon, std::size_t max_per_block = static_cast<std::size_t>(-1));

// Adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam(const ModelParams& like, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);
  void step(ModelParams& params, const ModelParams& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace dwlkit
