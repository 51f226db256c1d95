#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "dwlkit/temporal_graph.hpp"

namespace dwlkit {

// Raw (pre-projection) multi-interacted time encoding of a candidate node w
// against a target pair (u,v): two halves of K slots holding ln(1 + t - t')
// for the K most recent interactions of (w,u) and (w,v) before t, oldest
// kept first, zero padded.
struct MiteVector {
  std::size_t K = 0;
  std::vector<double> values;  // 2K entries

  std::span<const double> first_half() const { return std::span(values).first(K); }
  std::span<const double> second_half() const { return std::span(values).subspan(K); }
};

// ln(1 + x); real intervals are strictly positive, so 0 marks padding.
inline double normalize_interval(double dt) { return std::log1p(dt); }

MiteVector mite_raw(const Dat& dat, NodeId u, NodeId v, NodeId w, double t, std::size_t K);

// (#interactions of (w,u) before t, #interactions of (w,v) before t).
std::pair<std::size_t, std::size_t> ncoe(const Dat& dat, NodeId u, NodeId v, NodeId w, double t);

// Fourier time features sqrt(2/d_T) [cos(w_i dt), sin(w_i dt)]_i.
struct TimeEncoding {
  std::vector<double> frequencies;  // d_T / 2 entries

  std::size_t dim() const { return 2 * frequencies.size(); }

  // Geometric grid 10^{-9 i / (m-1)}, i = 0..m-1 with m = d_T / 2.
  static TimeEncoding decade_grid(std::size_t d_time);
};

Eigen::RowVectorXd time_encode(double dt, const TimeEncoding& enc);

// Per-neighbor encodings of the joint neighborhood N(u,t) ++ N(v,t).
struct EncodingBundle {
  NodeId u = 0;
  NodeId v = 0;
  double t = 0.0;
  Matrix X_C;                    // S x 3 d_N, rows [X_w || X_u || X_v]
  Matrix X_E;                    // S x d_E
  Matrix X_T;                    // S x d_T
  Matrix X_M;                    // S x 2K, raw MITE rows
  std::vector<double> delta_t;   // t - t' per row

  std::size_t rows() const { return delta_t.size(); }
};

EncodingBundle build_encoding_bundle(const DynamicGraph& g, const Dat& dat, NodeId u, NodeId v,
                                     double t, std::size_t limit, std::size_t K,
                                     const TimeEncoding& enc);

inline std::size_t patch_count(std::size_t rows, std::size_t P) {
  return rows == 0 ? 1 : (rows + P - 1) / P;
}

// Groups P consecutive rows into one row of width P * cols, zero padding the
// tail. Zero rows give a single all-zero patch.
Matrix patch_rows(const Matrix& x, std::size_t P);

struct AlignmentWeights {
  Matrix W_C, W_E, W_T, W_M;                  // (P d_*) x d
  Eigen::RowVectorXd b_C, b_E, b_T, b_M;      // d
};

struct PatchedEncodings {
  std::size_t P = 1;
  std::size_t patches = 0;  // ceil(S / P), at least 1
  Matrix Z;                 // patches x 4d, [Z_C || Z_E || Z_T || Z_M]
};

PatchedEncodings patch_and_align(const EncodingBundle& bundle, std::size_t P,
                                 const AlignmentWeights& weights);

}  // namespace dwlkit
