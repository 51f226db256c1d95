#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dwlkit/model.hpp"
#include "test_support.hpp"

using namespace dwlkit;
using dwlkit::testing::bundle_for;
using dwlkit::testing::randomize;
using dwlkit::testing::tiny_config;

namespace {

// Five events with random node and edge features.
DynamicGraph featured_graph(std::uint64_t seed, std::size_t n = 5, std::size_t m = 12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> x(-1.0, 1.0);
  const DynamicGraph base = random_dynamic_graph(n, m, 10.0, seed);
  std::vector<Event> events(base.events().begin(), base.events().end());
  for (std::size_t i = 0; i < events.size(); ++i) events[i].edge_feature_index = i;
  Matrix nf(static_cast<Eigen::Index>(n), 2);
  Matrix ef(static_cast<Eigen::Index>(m), 3);
  for (Eigen::Index i = 0; i < nf.size(); ++i) nf.data()[i] = x(rng);
  for (Eigen::Index i = 0; i < ef.size(); ++i) ef.data()[i] = x(rng);
  return DynamicGraph(n, std::move(events), nf, ef);
}

ModelConfig featured_config() {
  ModelConfig c = tiny_config();
  c.node_dim = 2;
  c.edge_dim = 3;
  return c;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Matrix ln_ref(const Matrix& x, const LayerNormParams& p) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      out(r, c) = (x(r, c) - mean) / std::sqrt(var + 1e-5) * p.gain(0, c) + p.bias(0, c);
    }
  }
  return out;
}

double gelu_ref(double x) { return x * 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

TEST(Model, ZeroWeightsGiveHalf) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(1);
  const auto out = forward(ModelParams::zeros(c), bundle_for(g, 0, 1, 11.0, c));
  EXPECT_DOUBLE_EQ(out.score, 0.5);
  EXPECT_DOUBLE_EQ(out.logit, 0.0);
}

TEST(Model, EmptyNeighborhoodIsWellDefined) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(2);
  ModelParams p = ModelParams::init(c, 3);
  const auto b = bundle_for(g, 0, 1, 0.0, c);
  ASSERT_EQ(b.rows(), 0u);
  EXPECT_EQ(embed_patches(p, b).rows(), 1);
  const auto out = forward(p, b);
  EXPECT_GT(out.score, 0.0);
  EXPECT_LT(out.score, 1.0);
}

TEST(Model, SinglePatchMatchesHandComputation) {
  ModelConfig c = tiny_config();
  c.heads = 2;
  ModelParams p = ModelParams::zeros(c);
  randomize(p, 11);
  Matrix z(1, static_cast<Eigen::Index>(c.width()));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = u(rng);

  // softmax over a single key is 1, so each head returns its value row
  Matrix h = z;
  for (const auto& layer : p.layers) {
    const Matrix n1 = ln_ref(h, layer.ln1);
    Matrix attn = Matrix::Zero(1, h.cols());
    for (const auto& head : layer.heads) attn += n1 * head.wv * head.wo;
    const Matrix mid = h + attn;
    Matrix f = ln_ref(mid, layer.ln2) * layer.ffn_in.w + layer.ffn_in.b;
    f = f.unaryExpr(&gelu_ref);
    h = mid + f * layer.ffn_out.w + layer.ffn_out.b;
  }
  const Matrix emb = h * p.out.w + p.out.b;
  const double logit = (emb * p.scorer.w)(0, 0) + p.scorer.b(0, 0);
  const auto out = forward_patches(p, z);
  EXPECT_NEAR(out.logit, logit, 1e-12);
  EXPECT_NEAR(out.score, sigmoid(logit), 1e-12);
  EXPECT_LT((out.embedding - emb.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, PatchPermutationInvariance) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(4, 6, 20);
  ModelParams p = ModelParams::init(c, 9);
  randomize(p, 10);
  const Matrix z = embed_patches(p, bundle_for(g, 0, 1, 11.0, c));
  ASSERT_GE(z.rows(), 3);
  Matrix zp = z;
  zp.row(0) = z.row(z.rows() - 1);
  zp.row(z.rows() - 1) = z.row(0);
  const auto a = forward_patches(p, z);
  const auto b = forward_patches(p, zp);
  EXPECT_LE((a.embedding - b.embedding).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(a.score, b.score, 1e-10);
}

TEST(Model, NodeRelabelingLeavesScoresUnchanged) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(6, 6, 20);
  ModelParams p = ModelParams::init(c, 1);
  randomize(p, 2);
  std::mt19937_64 rng(3);
  const auto perm = random_permutation(g.node_count(), rng);
  const DynamicGraph h = permute_graph(g, perm);
  for (NodeId u = 0; u < 6; ++u) {
    for (NodeId v = 0; v < 6; ++v) {
      const double a = forward(p, bundle_for(g, u, v, 11.0, c)).score;
      const double b = forward(p, bundle_for(h, perm[u], perm[v], 11.0, c)).score;
      EXPECT_NEAR(a, b, 1e-12) << u << "," << v;
    }
  }
}

TEST(Model, BundleShapeMismatchThrows) {
  const ModelConfig c = tiny_config();  // d_N = d_E = 1
  const DynamicGraph g = featured_graph(7);
  EXPECT_THROW(forward(ModelParams::zeros(c), bundle_for(g, 0, 1, 11.0, featured_config())), std::invalid_argument);
}

TEST(Model, ConfigValidation) {
  ModelConfig c;
  c.heads = 3;  // 200 not divisible by 3
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ModelConfig{};
  c.time_dim = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_NO_THROW(ModelConfig{}.validate());
}

TEST(Model, NonFiniteActivationReportsLayer) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(8);
  const auto b = bundle_for(g, 0, 1, 11.0, c);
  ModelParams p = ModelParams::init(c, 1);
  p.align_c.b(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    forward(p, b);
    FAIL();
  } catch (const NonFiniteActivation& e) {
    EXPECT_EQ(e.layer(), -1);
  }
  p = ModelParams::init(c, 1);
  p.layers[0].ffn_out.b(0, 0) = std::numeric_limits<double>::infinity();
  try {
    forward(p, b);
    FAIL();
  } catch (const NonFiniteActivation& e) {
    EXPECT_EQ(e.layer(), 0);
  }
}

TEST(Model, InitIsSeededAndShaped) {
  const ModelConfig c;
  const ModelParams a = ModelParams::init(c, 5);
  const ModelParams b = ModelParams::init(c, 5);
  std::vector<Matrix> ma, mb;
  a.for_each_block([&](const std::string&, const Matrix& m) { ma.push_back(m); });
  b.for_each_block([&](const std::string&, const Matrix& m) { mb.push_back(m); });
  ASSERT_EQ(ma.size(), mb.size());
  for (std::size_t i = 0; i < ma.size(); ++i) EXPECT_EQ(ma[i], mb[i]);
  EXPECT_EQ(a.mite1.w.rows(), 64);
  EXPECT_EQ(a.mite1.w.cols(), 50);
  EXPECT_EQ(a.align_t.w.rows(), 100);
  EXPECT_EQ(a.layers.size(), 2u);
  EXPECT_EQ(a.layers[0].heads.size(), 2u);
  EXPECT_EQ(a.layers[0].heads[0].wq.cols(), 100);
  EXPECT_EQ(a.out.w.cols(), 50);
  EXPECT_TRUE((a.layers[0].ln1.gain.array() == 1.0).all());
  const double lim = std::sqrt(6.0 / (64 + 50));
  EXPECT_LE(a.mite1.w.cwiseAbs().maxCoeff(), lim);
  EXPECT_DOUBLE_EQ(a.time_freq(0, 0), 1.0);
  EXPECT_NEAR(a.time_freq(0, 49), 1e-9, 1e-24);
}

TEST(Loss, HalfProbabilityCostsLn2) {
  EXPECT_NEAR(bce(0.5, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce(0.5, 0.0), std::log(2.0), 1e-15);
  EXPECT_TRUE(std::isfinite(bce(0.0, 1.0)));
  EXPECT_NEAR(bce(0.0, 1.0), -std::log(kProbClamp), 1e-9);
  EXPECT_TRUE(std::isfinite(bce(1.0, 0.0)));
}

TEST(Loss, EmptyBatchThrows) {
  const ModelParams p = ModelParams::zeros(tiny_config());
  EXPECT_THROW(loss_and_grad(p, {}), std::invalid_argument);
}

TEST(Loss, DuplicatedExampleMatchesSingle) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(12);
  ModelParams p = ModelParams::init(c, 3);
  randomize(p, 4);
  const Example ex{bundle_for(g, 0, 1, 11.0, c), 1.0};
  const std::vector<Example> one{ex};
  const std::vector<Example> two{ex, ex};
  const auto a = loss_and_grad(p, one);
  const auto b = loss_and_grad(p, two);
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  std::vector<Matrix> ga, gb;
  a.grad.for_each_block([&](const std::string&, const Matrix& m) { ga.push_back(m); });
  b.grad.for_each_block([&](const std::string&, const Matrix& m) { gb.push_back(m); });
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_LE((ga[i] - gb[i]).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Loss, ScorerBiasGradientIsResidual) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(13);
  ModelParams p = ModelParams::init(c, 3);
  randomize(p, 5);
  for (double y : {0.0, 1.0}) {
    const std::vector<Example> batch{{bundle_for(g, 1, 2, 11.0, c), y}};
    const double prob = forward(p, batch[0].bundle).score;
    const auto lg = loss_and_grad(p, batch);
    EXPECT_NEAR(lg.grad.scorer.b(0, 0), prob - y, 1e-15);
  }
}

TEST(Loss, ScoresStayInsideUnitIntervalUnderLargeWeights) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(14);
  ModelParams p = ModelParams::zeros(c);
  randomize(p, 6, 3.0);
  p.scorer.b(0, 0) = 60.0;
  const std::vector<Example> batch{{bundle_for(g, 0, 1, 11.0, c), 0.0}};
  const double s = forward(p, batch[0].bundle).score;
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, 1.0);
  EXPECT_TRUE(std::isfinite(batch_loss(p, batch)));
}

TEST(GradCheck, TinyRandomModel) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(15, 5, 12);
  ModelParams p = ModelParams::zeros(c);
  randomize(p, 7);
  EncodingBundle b;
  for (NodeId u = 0; u < 5 && patch_count(b.rows(), c.patch_size) != 3; ++u) b = bundle_for(g, u, (u + 1) % 5, 11.0, c);
  ASSERT_EQ(patch_count(b.rows(), c.patch_size), 3u);
  const std::vector<Example> batch{{b, 1.0}, {bundle_for(g, 2, 3, 9.0, c), 0.0}};
  const GradReport r = finite_diff_check(p, batch, 1e-5);
  for (const auto& [name, err] : r.max_rel_error) EXPECT_LT(err, 1e-4) << name;
  EXPECT_LT(r.max_rel_error.at("scorer.b"), 1e-8);
  EXPECT_LT(r.max_rel_error.at("layer0.ln1.gain"), 1e-4);
  EXPECT_LT(r.max_rel_error.at("time.freq"), 1e-4);
}

TEST(GradCheck, ZeroParameters) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(16);
  const std::vector<Example> batch{{bundle_for(g, 0, 1, 11.0, c), 1.0}};
  const GradReport r = finite_diff_check(ModelParams::zeros(c), batch, 1e-5);
  for (const auto& [name, err] : r.max_rel_error) {
    EXPECT_TRUE(std::isfinite(err)) << name;
    EXPECT_LT(err, 1e-6) << name;
  }
}

TEST(GradCheck, AblatedMiteStillConsistent) {
  ModelConfig c = featured_config();
  c.use_mite = false;
  const DynamicGraph g = featured_graph(17);
  ModelParams p = ModelParams::zeros(c);
  randomize(p, 8);
  const std::vector<Example> batch{{bundle_for(g, 0, 1, 11.0, c), 1.0}};
  const GradReport r = finite_diff_check(p, batch, 1e-5);
  EXPECT_LT(r.worst(), 1e-4);
  const auto lg = loss_and_grad(p, batch);
  EXPECT_EQ(lg.grad.mite1.w.cwiseAbs().maxCoeff(), 0.0);
}

TEST(GradCheck, EpsilonOutOfRangeThrows) {
  const ModelConfig c = tiny_config();
  const DynamicGraph g = six_node_graph();
  const std::vector<Example> batch{{bundle_for(g, 0, 2, 4.0, c), 1.0}};
  EXPECT_THROW(finite_diff_check(ModelParams::zeros(c), batch, 1e-2), std::invalid_argument);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const ModelConfig c = tiny_config();
  ModelParams p = ModelParams::zeros(c);
  ModelParams g = p.zeros_like();
  g.scorer.b(0, 0) = 0.3;
  g.out.w(0, 0) = -2.0;
  Adam adam(p, 0.01);
  adam.step(p, g);
  EXPECT_NEAR(p.scorer.b(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p.out.w(0, 0), 0.01, 1e-9);
  EXPECT_EQ(p.out.w(1, 0), 0.0);
}

TEST(Adam, DescendsTheLoss) {
  const ModelConfig c = featured_config();
  const DynamicGraph g = featured_graph(18);
  ModelParams p = ModelParams::init(c, 1);
  const std::vector<Example> batch{{bundle_for(g, 0, 1, 11.0, c), 1.0}, {bundle_for(g, 0, 3, 11.0, c), 0.0}};
  const double before = batch_loss(p, batch);
  Adam adam(p, 1e-2);
  for (int i = 0; i < 30; ++i) adam.step(p, loss_and_grad(p, batch).grad);
  EXPECT_LT(batch_loss(p, batch), before);
}
