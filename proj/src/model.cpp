#include "dwlkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

namespace dwlkit {

void ModelConfig::validate() const {
  if (time_dim == 0 || time_dim % 2 != 0) throw std::invalid_argument("time_dim must be even and positive");
  if (mite_k == 0 || mite_dim == 0 || align_dim == 0) throw std::invalid_argument("dimensions must be positive");
  if (heads == 0 || width() % heads != 0) throw std::invalid_argument("width 4d must be divisible by heads");
  if (patch_size == 0) throw std::invalid_argument("patch size must be positive");
  if (neighbor_limit == 0) throw std::invalid_argument("neighbor limit must be positive");
}

namespace {

using Eigen::Index;

Index ix(std::size_t n) { return static_cast<Index>(n); }

Linear make_linear(std::size_t in, std::size_t out) {
  return {Matrix::Zero(ix(in), ix(out)), Matrix::Zero(1, ix(out))};
}

ModelParams make_shapes(const ModelConfig& c) {
  c.validate();
  ModelParams p;
  p.config = c;
  const std::size_t d = c.align_dim;
  const std::size_t w = c.width();
  const std::size_t P = c.patch_size;
  p.mite1 = make_linear(2 * c.mite_k, c.mite_dim);
  p.mite2 = make_linear(c.mite_dim, c.mite_dim);
  p.time_freq = Matrix::Zero(1, ix(c.time_dim / 2));
  p.align_c = make_linear(P * 3 * c.node_dim, d);
  p.align_e = make_linear(P * c.edge_dim, d);
  p.align_t = make_linear(P * c.time_dim, d);
  p.align_m = make_linear(P * c.mite_dim, d);
  p.layers.resize(c.layers);
  for (auto& layer : p.layers) {
    layer.ln1 = {Matrix::Zero(1, ix(w)), Matrix::Zero(1, ix(w))};
    layer.ln2 = {Matrix::Zero(1, ix(w)), Matrix::Zero(1, ix(w))};
    layer.heads.resize(c.heads);
    for (auto& h : layer.heads) {
      h.wq = Matrix::Zero(ix(w), ix(c.head_dim()));
      h.wk = Matrix::Zero(ix(w), ix(c.head_dim()));
      h.wv = Matrix::Zero(ix(w), ix(c.head_dim()));
      h.wo = Matrix::Zero(ix(c.head_dim()), ix(w));
    }
    layer.ffn_in = make_linear(w, c.ffn_width());
    layer.ffn_out = make_linear(c.ffn_width(), w);
  }
  p.out = make_linear(w, c.output_dim());
  p.scorer = make_linear(c.output_dim(), 1);
  return p;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }
double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)) +
         x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

Matrix affine(const Matrix& x, const Linear& lin) {
  Matrix y = x * lin.w;
  y.rowwise() += lin.b.row(0);
  return y;
}

void affine_back(const Matrix& x, const Matrix& dy, Linear& grad) {
  grad.w.noalias() += x.transpose() * dy;
  grad.b += dy.colwise().sum();
}

constexpr double kLayerNormEps = 1e-5;

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

Matrix layer_norm(const Matrix& x, const LayerNormParams& p, LayerNormCache& cache) {
  const double n = static_cast<double>(x.cols());
  const Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().sum() / n;
  cache.inv_std = (var.array() + kLayerNormEps).rsqrt();
  cache.xhat = centered.array().colwise() * cache.inv_std.array();
  Matrix y = cache.xhat.array().rowwise() * p.gain.row(0).array();
  y.rowwise() += p.bias.row(0);
  return y;
}

Matrix layer_norm_back(const Matrix& dy, const LayerNormParams& p, const LayerNormCache& cache,
                       LayerNormParams& grad) {
  grad.gain += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  grad.bias += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * p.gain.row(0).array();
  const Eigen::VectorXd mean_d = dxhat.rowwise().mean();
  const Eigen::VectorXd mean_dx = (dxhat.array() * cache.xhat.array()).rowwise().mean();
  Matrix dx = dxhat.colwise() - mean_d;
  dx -= (cache.xhat.array().colwise() * mean_dx.array()).matrix();
  return dx.array().colwise() * cache.inv_std.array();
}

Matrix softmax_rows(const Matrix& s) {
  Matrix out(s.rows(), s.cols());
  for (Index r = 0; r < s.rows(); ++r) {
    const double mx = s.row(r).maxCoeff();
    out.row(r) = (s.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

struct HeadCache {
  Matrix q, k, v, attn, o;
};

struct LayerCache {
  Matrix input;
  LayerNormCache ln1;
  Matrix n1;
  std::vector<HeadCache> heads;
  Matrix mid;  // residual stream after attention
  LayerNormCache ln2;
  Matrix n2;
  Matrix f1;
  Matrix g;
};

struct EmbedCache {
  Matrix x_m;   // MITE input after optional ablation
  Matrix m1;
  Matrix a1;
  Matrix m2;
  Matrix phase;
  Matrix pc, pe, pt, pm;  // patched inputs
};

struct ForwardCache {
  EmbedCache embed;
  std::vector<LayerCache> layers;
  Matrix h_last;
  Eigen::RowVectorXd pooled;
};

void check_finite(const Matrix& m, int layer, const char* what) {
  if (!m.allFinite()) throw NonFiniteActivation(layer, what);
}

Matrix time_features(const ModelParams& p, std::span<const double> dt, Matrix& phase) {
  const Index m = p.time_freq.cols();
  const double scale = std::sqrt(2.0 / static_cast<double>(2 * m));
  const Index S = ix(dt.size());
  phase.resize(S, m);
  Matrix xt(S, 2 * m);
  for (Index r = 0; r < S; ++r) {
    for (Index i = 0; i < m; ++i) {
      const double ph = p.time_freq(0, i) * dt[static_cast<std::size_t>(r)];
      phase(r, i) = ph;
      xt(r, 2 * i) = scale * std::cos(ph);
      xt(r, 2 * i + 1) = scale * std::sin(ph);
    }
  }
  return xt;
}

void check_bundle(const ModelConfig& c, const EncodingBundle& b) {
  const Index S = ix(b.rows());
  if (b.X_C.rows() != S || b.X_E.rows() != S || b.X_M.rows() != S) {
    throw std::invalid_argument("bundle matrices disagree on row count");
  }
  if (b.X_C.cols() != ix(3 * c.node_dim) || b.X_E.cols() != ix(c.edge_dim) ||
      b.X_M.cols() != ix(2 * c.mite_k)) {
    throw std::invalid_argument("bundle feature widths do not match the model configuration");
  }
}

Matrix embed(const ModelParams& p, const EncodingBundle& b, EmbedCache& cache) {
  const ModelConfig& c = p.config;
  check_bundle(c, b);
  const std::size_t P = c.patch_size;
  cache.x_m = c.use_mite ? b.X_M : Matrix::Zero(b.X_M.rows(), b.X_M.cols());
  cache.m1 = affine(cache.x_m, p.mite1);
  cache.a1 = cache.m1.unaryExpr(&gelu);
  cache.m2 = affine(cache.a1, p.mite2);
  const Matrix xt = time_features(p, b.delta_t, cache.phase);

  cache.pc = patch_rows(b.X_C, P);
  cache.pe = patch_rows(b.X_E, P);
  cache.pt = patch_rows(xt, P);
  cache.pm = patch_rows(cache.m2, P);
  const Index d = ix(c.align_dim);
  Matrix z(cache.pc.rows(), 4 * d);
  z << affine(cache.pc, p.align_c), affine(cache.pe, p.align_e), affine(cache.pt, p.align_t),
      affine(cache.pm, p.align_m);
  check_finite(z, -1, "input embedding");
  return z;
}

Matrix unpatch(const Matrix& patched, std::size_t rows, Index cols) {
  Matrix out(ix(rows), cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t P = static_cast<std::size_t>(patched.cols() / cols);
    out.row(ix(r)) = patched.block(ix(r / P), ix(r % P) * cols, 1, cols);
  }
  return out;
}

void embed_back(const ModelParams& p, const EncodingBundle& b, const EmbedCache& cache,
                const Matrix& dz, ModelParams& grad) {
  const ModelConfig& c = p.config;
  const Index d = ix(c.align_dim);
  const Matrix dzc = dz.middleCols(0, d);
  const Matrix dze = dz.middleCols(d, d);
  const Matrix dzt = dz.middleCols(2 * d, d);
  const Matrix dzm = dz.middleCols(3 * d, d);
  affine_back(cache.pc, dzc, grad.align_c);
  affine_back(cache.pe, dze, grad.align_e);
  affine_back(cache.pt, dzt, grad.align_t);
  affine_back(cache.pm, dzm, grad.align_m);

  const std::size_t S = b.rows();
  if (S == 0) return;

  const Index m = p.time_freq.cols();
  const Matrix dxt = unpatch(dzt * p.align_t.w.transpose(), S, 2 * m);
  const double scale = std::sqrt(2.0 / static_cast<double>(2 * m));
  for (Index r = 0; r < ix(S); ++r) {
    const double dt = b.delta_t[static_cast<std::size_t>(r)];
    for (Index i = 0; i < m; ++i) {
      const double ph = cache.phase(r, i);
      grad.time_freq(0, i) += scale * dt * (-dxt(r, 2 * i) * std::sin(ph) + dxt(r, 2 * i + 1) * std::cos(ph));
    }
  }

  const Matrix dm2 = unpatch(dzm * p.align_m.w.transpose(), S, ix(c.mite_dim));
  affine_back(cache.a1, dm2, grad.mite2);
  const Matrix da1 = dm2 * p.mite2.w.transpose();
  const Matrix dm1 = da1.array() * cache.m1.unaryExpr(&gelu_grad).array();
  affine_back(cache.x_m, dm1, grad.mite1);
}

Matrix layer_forward(const EncoderLayer& layer, const ModelConfig& c, const Matrix& h, LayerCache& cache,
                     int index) {
  cache.input = h;
  cache.n1 = layer_norm(h, layer.ln1, cache.ln1);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(c.head_dim()));
  Matrix attn = Matrix::Zero(h.rows(), h.cols());
  cache.heads.resize(layer.heads.size());
  for (std::size_t i = 0; i < layer.heads.size(); ++i) {
    const AttentionHead& head = layer.heads[i];
    HeadCache& hc = cache.heads[i];
    hc.q = cache.n1 * head.wq;
    hc.k = cache.n1 * head.wk;
    hc.v = cache.n1 * head.wv;
    hc.attn = softmax_rows((hc.q * hc.k.transpose()) * inv_sqrt);
    hc.o = hc.attn * hc.v;
    attn.noalias() += hc.o * head.wo;
  }
  cache.mid = h + attn;
  cache.n2 = layer_norm(cache.mid, layer.ln2, cache.ln2);
  cache.f1 = affine(cache.n2, layer.ffn_in);
  cache.g = cache.f1.unaryExpr(&gelu);
  Matrix out = cache.mid + affine(cache.g, layer.ffn_out);
  check_finite(out, index, "encoder layer");
  return out;
}

Matrix layer_back(const EncoderLayer& layer, const ModelConfig& c, const LayerCache& cache,
                  const Matrix& dout, EncoderLayer& grad) {
  // FFN branch
  affine_back(cache.g, dout, grad.ffn_out);
  const Matrix dg = dout * layer.ffn_out.w.transpose();
  const Matrix df1 = dg.array() * cache.f1.unaryExpr(&gelu_grad).array();
  affine_back(cache.n2, df1, grad.ffn_in);
  const Matrix dn2 = df1 * layer.ffn_in.w.transpose();
  Matrix dmid = dout + layer_norm_back(dn2, layer.ln2, cache.ln2, grad.ln2);

  // attention branch
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(c.head_dim()));
  Matrix dn1 = Matrix::Zero(cache.n1.rows(), cache.n1.cols());
  for (std::size_t i = 0; i < layer.heads.size(); ++i) {
    const AttentionHead& head = layer.heads[i];
    const HeadCache& hc = cache.heads[i];
    AttentionHead& gh = grad.heads[i];
    gh.wo.noalias() += hc.o.transpose() * dmid;
    const Matrix d_o = dmid * head.wo.transpose();
    const Matrix d_attn = d_o * hc.v.transpose();
    const Matrix dv = hc.attn.transpose() * d_o;
    const Eigen::VectorXd row_dot = (d_attn.array() * hc.attn.array()).rowwise().sum();
    Matrix dscore = hc.attn.array() * (d_attn.colwise() - row_dot).array();
    dscore *= inv_sqrt;
    const Matrix dq = dscore * hc.k;
    const Matrix dk = dscore.transpose() * hc.q;
    gh.wq.noalias() += cache.n1.transpose() * dq;
    gh.wk.noalias() += cache.n1.transpose() * dk;
    gh.wv.noalias() += cache.n1.transpose() * dv;
    dn1.noalias() += dq * head.wq.transpose();
    dn1.noalias() += dk * head.wk.transpose();
    dn1.noalias() += dv * head.wv.transpose();
  }
  return dmid + layer_norm_back(dn1, layer.ln1, cache.ln1, grad.ln1);
}

PairOutput head_forward(const ModelParams& p, const Matrix& h, Eigen::RowVectorXd& pooled) {
  pooled = h.colwise().mean();
  PairOutput out;
  out.embedding = pooled * p.out.w + p.out.b.row(0);
  out.logit = (out.embedding * p.scorer.w)(0, 0) + p.scorer.b(0, 0);
  out.score = out.logit >= 0.0 ? 1.0 / (1.0 + std::exp(-out.logit))
                               : std::exp(out.logit) / (1.0 + std::exp(out.logit));
  // keep saturated scores strictly inside (0,1)
  out.score = std::clamp(out.score, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
  if (!out.embedding.allFinite() || !std::isfinite(out.logit)) {
    throw NonFiniteActivation(static_cast<int>(p.layers.size()), "output head");
  }
  return out;
}

PairOutput run_forward(const ModelParams& p, const EncodingBundle& b, ForwardCache& cache) {
  Matrix h = embed(p, b, cache.embed);
  cache.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    h = layer_forward(p.layers[l], p.config, h, cache.layers[l], static_cast<int>(l));
  }
  cache.h_last = h;
  return head_forward(p, h, cache.pooled);
}

// Logit bounds equivalent to clamping p to [kProbClamp, 1 - kProbClamp].
const double kLogitLo = std::log(kProbClamp) - std::log1p(-kProbClamp);
const double kLogitHi = -kLogitLo;

double dloss_dlogit(double logit, double p, double label) {
  if (logit < kLogitLo || logit > kLogitHi) return 0.0;  // clamped region is flat
  return p - label;
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config) { return make_shapes(config); }

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.for_each_block([](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

ModelParams ModelParams::init(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = make_shapes(config);
  std::mt19937_64 rng(seed);
  p.for_each_block([&](const std::string& name, Matrix& m) {
    const bool is_bias = name.ends_with(".b") || name.ends_with(".bias");
    if (name.ends_with(".gain")) {
      m.setOnes();
    } else if (name == "time.freq") {
      const TimeEncoding enc = TimeEncoding::decade_grid(config.time_dim);
      for (Index i = 0; i < m.cols(); ++i) m(0, i) = enc.frequencies[static_cast<std::size_t>(i)];
    } else if (!is_bias) {
      const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
      }
    }
  });
  return p;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for_each_block([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

Matrix embed_patches(const ModelParams& params, const EncodingBundle& bundle) {
  EmbedCache cache;
  return embed(params, bundle, cache);
}

PairOutput forward_patches(const ModelParams& params, const Matrix& Z) {
  if (Z.cols() != ix(params.config.width())) throw std::invalid_argument("patch width mismatch");
  Matrix h = Z;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    LayerCache cache;
    h = layer_forward(params.layers[l], params.config, h, cache, static_cast<int>(l));
  }
  Eigen::RowVectorXd pooled;
  return head_forward(params, h, pooled);
}

PairOutput forward(const ModelParams& params, const EncodingBundle& bundle) {
  ForwardCache cache;
  return run_forward(params, bundle, cache);
}

double bce_logit(double logit, double label) {
  const double z = std::clamp(logit, kLogitLo, kLogitHi);
  // softplus(z) - y z, i.e. -[y ln p + (1-y) ln(1-p)] without cancellation
  const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - label * z;
}

double bce(double p, double label) {
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
}

double batch_loss(const ModelParams& params, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const Example& ex : batch) total += bce_logit(forward(params, ex.bundle).logit, ex.label);
  return total / static_cast<double>(batch.size());
}

LossAndGrad loss_and_grad(const ModelParams& params, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  LossAndGrad out;
  out.grad = params.zeros_like();
  ModelParams& g = out.grad;
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  ForwardCache cache;
  for (const Example& ex : batch) {
    const PairOutput fwd = run_forward(params, ex.bundle, cache);
    out.loss += bce_logit(fwd.logit, ex.label) * inv_b;
    const double dlogit = dloss_dlogit(fwd.logit, fwd.score, ex.label) * inv_b;

    // scorer and output map
    g.scorer.w += fwd.embedding.transpose() * dlogit;
    g.scorer.b(0, 0) += dlogit;
    const Eigen::RowVectorXd demb = dlogit * params.scorer.w.col(0).transpose();
    g.out.w += cache.pooled.transpose() * demb;
    g.out.b += demb;
    const Eigen::RowVectorXd dpooled = demb * params.out.w.transpose();

    // mean pooling
    const Index np = cache.h_last.rows();
    Matrix dh = dpooled.replicate(np, 1) / static_cast<double>(np);
    for (std::size_t l = params.layers.size(); l-- > 0;) {
      dh = layer_back(params.layers[l], params.config, cache.layers[l], dh, g.layers[l]);
    }
    embed_back(params, ex.bundle, cache.embed, dh, g);
  }
  return out;
}

double GradReport::worst() const {
  double w = 0.0;
  for (const auto& [name, err] : max_rel_error) w = std::max(w, err);
  return w;
}

GradReport finite_diff_check(const ModelParams& params, std::span<const Example> batch, double epsilon,
                             std::size_t max_per_block) {
  if (epsilon < 1e-7 || epsilon > 1e-3) throw std::invalid_argument("epsilon must lie in [1e-7, 1e-3]");
  const LossAndGrad analytic = loss_and_grad(params, batch);
  std::vector<const Matrix*> grad_blocks;
  analytic.grad.for_each_block([&](const std::string&, const Matrix& m) { grad_blocks.push_back(&m); });

  GradReport report;
  report.epsilon = epsilon;
  ModelParams probe = params;
  std::size_t block = 0;
  probe.for_each_block([&](const std::string& name, Matrix& m) {
    const Matrix& ga = *grad_blocks[block++];
    double worst = 0.0;
    const auto n = static_cast<std::size_t>(m.size());
    const std::size_t stride = n <= max_per_block ? 1 : (n + max_per_block - 1) / max_per_block;
    for (std::size_t i = 0; i < n; i += stride) {
      double& theta = m.data()[i];
      const double saved = theta;
      theta = saved + epsilon;
      const double up = batch_loss(probe, batch);
      theta = saved - epsilon;
      const double down = batch_loss(probe, batch);
      theta = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = ga.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
      report.samples.push_back({name, i, a, numeric});
    }
    report.max_rel_error[name] = worst;
  });
  return report;
}

Adam::Adam(const ModelParams& like, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  like.for_each_block([&](const std::string&, const Matrix& m) {
    m_.push_back(Matrix::Zero(m.rows(), m.cols()));
    v_.push_back(Matrix::Zero(m.rows(), m.cols()));
  });
}

void Adam::step(ModelParams& params, const ModelParams& grad) {
  ++t_;
  std::vector<const Matrix*> grads;
  grad.for_each_block([&](const std::string&, const Matrix& m) { grads.push_back(&m); });
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t i = 0;
  params.for_each_block([&](const std::string&, Matrix& p) {
    const Matrix& g = *grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    p.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    ++i;
  });
}

}  // namespace dwlkit
