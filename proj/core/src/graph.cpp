#include "fsoalloc/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace fsoalloc {

ChannelMatrix ChannelMatrix::make(Eigen::MatrixXd g) {
  if (g.rows() < 1 || g.cols() < 1)
    throw std::invalid_argument("ChannelMatrix: needs at least one RRH and one AN");
  if (!g.allFinite())
    throw std::invalid_argument("ChannelMatrix: non-finite channel gain");
  if ((g.array() < 0.0).any())
    throw std::invalid_argument("ChannelMatrix: negative channel gain");
  return ChannelMatrix{std::move(g)};
}

PermutationMap::PermutationMap(std::vector<int> mapping) : map_(std::move(mapping)) {
  const int n = static_cast<int>(map_.size());
  std::vector<char> seen(map_.size(), 0);
  for (int v : map_) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
      throw std::invalid_argument("PermutationMap: mapping is not a bijection");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

PermutationMap PermutationMap::identity(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = i;
  return PermutationMap(std::move(m));
}

PermutationMap PermutationMap::inverse() const {
  std::vector<int> inv(map_.size());
  for (int i = 0; i < size(); ++i) inv[static_cast<std::size_t>(map_[static_cast<std::size_t>(i)])] = i;
  return PermutationMap(std::move(inv));
}

bool PermutationMap::class_preserving(int n_rrh, int n_an) const {
  if (size() != n_rrh + n_an) return false;
  for (int i = 0; i < n_rrh; ++i)
    if (map_[static_cast<std::size_t>(i)] >= n_rrh) return false;
  for (int i = n_rrh; i < size(); ++i)
    if (map_[static_cast<std::size_t>(i)] < n_rrh) return false;
  return true;
}

ShiftMatrix build_shift(const ChannelMatrix& h) {
  if (!h.gains.allFinite())
    throw std::invalid_argument("build_shift: non-finite channel gain");
  const int n = h.n_rrh();
  const int m = h.n_an();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n + m, n + m);
  s.topRightCorner(n, m) = h.gains;
  s.bottomLeftCorner(m, n) = h.gains.transpose();
  return ShiftMatrix{std::move(s), n, m};
}

NodeSignal apply_shift(const ShiftMatrix& s, const NodeSignal& x) {
  if (x.size() != s.size())
    throw std::invalid_argument("apply_shift: signal length does not match shift size");
  return s.s * x;
}

NodeSignal graph_filter(const ShiftMatrix& s, const NodeSignal& x,
                        std::span<const double> taps) {
  if (x.size() != s.size())
    throw std::invalid_argument("graph_filter: signal length does not match shift size");
  if (taps.empty())
    throw std::invalid_argument("graph_filter: needs at least the order-0 tap");
  for (double t : taps)
    if (!std::isfinite(t)) throw std::invalid_argument("graph_filter: non-finite tap");

  NodeSignal shifted = x;
  NodeSignal out = taps[0] * x;
  for (std::size_t k = 1; k < taps.size(); ++k) {
    shifted = s.s * shifted;
    out.noalias() += taps[k] * shifted;
  }
  return out;
}

NodeSignal permute_signal(const PermutationMap& p, const NodeSignal& x) {
  if (x.size() != p.size())
    throw std::invalid_argument("permute_signal: size mismatch");
  NodeSignal y(x.size());
  for (int i = 0; i < p.size(); ++i) y[i] = x[p[i]];
  return y;
}

ShiftMatrix permute_shift(const PermutationMap& p, const ShiftMatrix& s) {
  if (p.size() != s.size())
    throw std::invalid_argument("permute_shift: size mismatch");
  if (!p.class_preserving(s.n_rrh, s.n_an))
    throw std::invalid_argument("permute_shift: map must preserve RRH/AN classes");
  Eigen::MatrixXd out(s.size(), s.size());
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j) out(i, j) = s.s(p[i], p[j]);
  return ShiftMatrix{std::move(out), s.n_rrh, s.n_an};
}

}  // namespace fsoalloc
