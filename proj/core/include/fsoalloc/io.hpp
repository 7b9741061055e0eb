#pragma once

#include <string>

#include "fsoalloc/channel.hpp"
#include "fsoalloc/gnn.hpp"

namespace fsoalloc {

/// Binary model container. Layout (little-endian):
///   bytes 0..7   magic "FSOGNN01"
///   int32 x 4    n_layers, hidden_features, filter_order, output_features
///   uint64       tap count
///   double x N   taps, layer-major, then output feature, input feature, tap
/// Throws std::runtime_error on I/O failure or a corrupt/mismatched header.
void save_params(const std::string& path, const GnnParams& params);
GnnParams load_params(const std::string& path);

/// Plain-text topology container:
///   fsoalloc-topology-v1
///   <N> <M>
///   rrh <x_km> <y_km>     (N lines)
///   an <x_km> <y_km>      (M lines)
///   weight <w>            (N lines)
void save_topology(const std::string& path, const Topology& t);
Topology load_topology(const std::string& path);

}  // namespace fsoalloc
