#include "dwlkit/encodings.hpp"

#include <cmath>
#include <stdexcept>

namespace dwlkit {
namespace {

void fill_half(std::span<const double> before, double t, std::size_t K, double* out) {
  const std::size_t keep = std::min(K, before.size());
  const auto recent = before.last(keep);
  for (std::size_t k = 0; k < keep; ++k) out[k] = normalize_interval(t - recent[k]);
}

}  // namespace

MiteVector mite_raw(const Dat& dat, NodeId u, NodeId v, NodeId w, double t, std::size_t K) {
  if (K == 0) throw std::invalid_argument("MITE needs K >= 1");
  MiteVector m;
  m.K = K;
  m.values.assign(2 * K, 0.0);
  fill_half(dat.before(w, u, t), t, K, m.values.data());
  fill_half(dat.before(w, v, t), t, K, m.values.data() + K);
  return m;
}

std::pair<std::size_t, std::size_t> ncoe(const Dat& dat, NodeId u, NodeId v, NodeId w, double t) {
  return {dat.before(w, u, t).size(), dat.before(w, v, t).size()};
}

TimeEncoding TimeEncoding::decade_grid(std::size_t d_time) {
  if (d_time == 0 || d_time % 2 != 0) throw std::invalid_argument("time encoding dimension must be even");
  const std::size_t m = d_time / 2;
  TimeEncoding enc;
  enc.frequencies.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double exponent = m == 1 ? 0.0 : 9.0 * static_cast<double>(i) / static_cast<double>(m - 1);
    enc.frequencies[i] = std::pow(10.0, -exponent);
  }
  return enc;
}

Eigen::RowVectorXd time_encode(double dt, const TimeEncoding& enc) {
  const std::size_t m = enc.frequencies.size();
  const double scale = std::sqrt(2.0 / static_cast<double>(2 * m));
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(2 * m));
  for (std::size_t i = 0; i < m; ++i) {
    const double phase = enc.frequencies[i] * dt;
    out(static_cast<Eigen::Index>(2 * i)) = scale * std::cos(phase);
    out(static_cast<Eigen::Index>(2 * i + 1)) = scale * std::sin(phase);
  }
  return out;
}

EncodingBundle build_encoding_bundle(const DynamicGraph& g, const Dat& dat, NodeId u, NodeId v,
                                     double t, std::size_t limit, std::size_t K,
                                     const TimeEncoding& enc) {
  if (u >= g.node_count() || v >= g.node_count()) throw std::out_of_range("pair node out of range");
  if (limit == 0) throw std::invalid_argument("neighbor limit must be positive");
  const auto nu = historical_neighbors(g, u, t, limit);
  const auto nv = historical_neighbors(g, v, t, limit);
  const auto S = static_cast<Eigen::Index>(nu.entries.size() + nv.entries.size());
  const auto dN = static_cast<Eigen::Index>(g.node_feature_dim());
  const auto dE = static_cast<Eigen::Index>(g.edge_feature_dim());

  EncodingBundle b;
  b.u = u;
  b.v = v;
  b.t = t;
  b.X_C.resize(S, 3 * dN);
  b.X_E.resize(S, dE);
  b.X_T.resize(S, static_cast<Eigen::Index>(enc.dim()));
  b.X_M.resize(S, static_cast<Eigen::Index>(2 * K));
  b.delta_t.reserve(static_cast<std::size_t>(S));

  const auto& X = g.node_features();
  Eigen::Index row = 0;
  for (const auto* hood : {&nu, &nv}) {
    for (const NeighborEntry& e : hood->entries) {
      const double dt = t - e.time;
      b.X_C.row(row) << X.row(e.neighbor), X.row(u), X.row(v);
      b.X_E.row(row) = g.edge_feature(g.events()[e.event]);
      b.X_T.row(row) = time_encode(dt, enc);
      const MiteVector m = mite_raw(dat, u, v, e.neighbor, t, K);
      b.X_M.row(row) = Eigen::Map<const Eigen::RowVectorXd>(m.values.data(), static_cast<Eigen::Index>(m.values.size()));
      b.delta_t.push_back(dt);
      ++row;
    }
  }
  return b;
}

Matrix patch_rows(const Matrix& x, std::size_t P) {
  if (P == 0) throw std::invalid_argument("patch size must be positive");
  const std::size_t S = static_cast<std::size_t>(x.rows());
  const auto cols = x.cols();
  const std::size_t np = patch_count(S, P);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(P) * cols);
  for (std::size_t r = 0; r < S; ++r) {
    out.block(static_cast<Eigen::Index>(r / P), static_cast<Eigen::Index>(r % P) * cols, 1, cols) =
        x.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

namespace {

Matrix align(const Matrix& patched, const Matrix& W, const Eigen::RowVectorXd& b, const char* name) {
  if (patched.cols() != W.rows() || W.cols() != b.size()) {
    throw std::invalid_argument(std::string("alignment weight shape mismatch for ") + name);
  }
  Matrix z = patched * W;
  z.rowwise() += b;
  return z;
}

}  // namespace

PatchedEncodings patch_and_align(const EncodingBundle& bundle, std::size_t P,
                                 const AlignmentWeights& w) {
  if (P == 0) throw std::invalid_argument("patch size must be positive");
  PatchedEncodings out;
  out.P = P;
  out.patches = patch_count(bundle.rows(), P);
  const Matrix zc = align(patch_rows(bundle.X_C, P), w.W_C, w.b_C, "C");
  const Matrix ze = align(patch_rows(bundle.X_E, P), w.W_E, w.b_E, "E");
  const Matrix zt = align(patch_rows(bundle.X_T, P), w.W_T, w.b_T, "T");
  const Matrix zm = align(patch_rows(bundle.X_M, P), w.W_M, w.b_M, "M");
  if (zc.cols() != ze.cols() || zc.cols() != zt.cols() || zc.cols() != zm.cols()) {
    throw std::invalid_argument("aligned widths differ");
  }
  out.Z.resize(zc.rows(), 4 * zc.cols());
  out.Z << zc, ze, zt, zm;
  return out;
}

}  // namespace dwlkit
