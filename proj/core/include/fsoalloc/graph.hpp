#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace fsoalloc {

/// One scalar per node of the bipartite graph, RRH entries first, AN entries
/// after them. This node ordering is a project-wide convention.
using NodeSignal = Eigen::VectorXd;

/// Channel state between every RRH/AN pair: entries are nonnegative power
/// gains h_nm, row n = RRH, column m = AN.
struct ChannelMatrix {
  Eigen::MatrixXd gains;

  int n_rrh() const { return static_cast<int>(gains.rows()); }
  int n_an() const { return static_cast<int>(gains.cols()); }

  /// Validates finiteness and nonnegativity; throws std::invalid_argument.
  static ChannelMatrix make(Eigen::MatrixXd g);
};

/// CSI-weighted bipartite adjacency operator
///   S = [[0, H], [H^T, 0]]
/// with the top-left N x N and bottom-right M x M blocks identically zero.
struct ShiftMatrix {
  Eigen::MatrixXd s;
  int n_rrh = 0;
  int n_an = 0;

  int size() const { return n_rrh + n_an; }
};

/// Node relabeling. Entry i of the permuted signal is x[map[i]], i.e. slot i
/// of the relabeled network holds original node map[i].
class PermutationMap {
 public:
  /// Throws std::invalid_argument unless `mapping` is a bijection on
  /// [0, mapping.size()).
  explicit PermutationMap(std::vector<int> mapping);

  static PermutationMap identity(int n);
  /// Uniformly random permutation that maps RRH indices to RRH indices and
  /// AN indices to AN indices.
  template <class Rng>
  static PermutationMap random_class_preserving(int n_rrh, int n_an, Rng& rng);

  int size() const { return static_cast<int>(map_.size()); }
  int operator[](int slot) const { return map_[slot]; }
  const std::vector<int>& mapping() const { return map_; }

  PermutationMap inverse() const;
  /// True when RRH slots hold RRH nodes and AN slots hold AN nodes.
  bool class_preserving(int n_rrh, int n_an) const;

 private:
  std::vector<int> map_;
};

/// Assembles the shift matrix from the channel matrix.
ShiftMatrix build_shift(const ChannelMatrix& h);

/// y = S x: node i receives the edge-weighted sum over its neighbors.
NodeSignal apply_shift(const ShiftMatrix& s, const NodeSignal& x);

/// Polynomial graph filter sum_k taps[k] S^k x, evaluated by repeated
/// shifting (S^k is never formed).
NodeSignal graph_filter(const ShiftMatrix& s, const NodeSignal& x,
                        std::span<const double> taps);

NodeSignal permute_signal(const PermutationMap& p, const NodeSignal& x);

/// Conjugates the shift matrix: rows and columns reordered by the map. The
/// map must be class-preserving so the result keeps the bipartite block
/// structure.
ShiftMatrix permute_shift(const PermutationMap& p, const ShiftMatrix& s);

template <class Rng>
PermutationMap PermutationMap::random_class_preserving(int n_rrh, int n_an,
                                                       Rng& rng) {
  std::vector<int> m(static_cast<std::size_t>(n_rrh + n_an));
  for (int i = 0; i < n_rrh + n_an; ++i) m[static_cast<std::size_t>(i)] = i;
  // Fisher-Yates within each node class.
  for (int i = n_rrh - 1; i > 0; --i) {
    auto j = static_cast<int>(rng() % static_cast<unsigned long>(i + 1));
    std::swap(m[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(j)]);
  }
  for (int i = n_an - 1; i > 0; --i) {
    auto j = static_cast<int>(rng() % static_cast<unsigned long>(i + 1));
    std::swap(m[static_cast<std::size_t>(n_rrh + i)],
              m[static_cast<std::size_t>(n_rrh + j)]);
  }
  return PermutationMap(std::move(m));
}

}  // namespace fsoalloc
