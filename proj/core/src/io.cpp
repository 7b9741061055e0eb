#include "fsoalloc/io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fsoalloc {

namespace {

constexpr std::array<char, 8> kModelMagic = {'F', 'S', 'O', 'G', 'N', 'N', '0', '1'};
constexpr const char* kTopologyHeader = "fsoalloc-topology-v1";

}  // namespace

void save_params(const std::string& path, const GnnParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_params: cannot open " + path);
  out.write(kModelMagic.data(), kModelMagic.size());
  const GnnConfig& cfg = params.config();
  const std::int32_t dims[4] = {cfg.n_layers, cfg.hidden_features,
                                cfg.filter_order, cfg.output_features};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(params.flat().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw std::runtime_error("save_params: write failed for " + path);
}

GnnParams load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_params: cannot open " + path);
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kModelMagic)
    throw std::runtime_error("load_params: " + path +
                             " is not a fsoalloc model (bad magic/version)");
  std::int32_t dims[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in) throw std::runtime_error("load_params: truncated header in " + path);

  GnnConfig cfg;
  cfg.n_layers = dims[0];
  cfg.hidden_features = dims[1];
  cfg.filter_order = dims[2];
  cfg.output_features = dims[3];
  cfg.validate();
  if (count != cfg.param_count())
    throw std::runtime_error("load_params: tap count does not match header in " + path);

  GnnParams params(cfg);
  in.read(reinterpret_cast<char*>(params.flat().data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("load_params: truncated tap data in " + path);
  for (double v : params.flat())
    if (!std::isfinite(v))
      throw std::runtime_error("load_params: non-finite tap in " + path);
  return params;
}

void save_topology(const std::string& path, const Topology& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_topology: cannot open " + path);
  out << kTopologyHeader << "\n";
  out << t.n_rrh() << " " << t.n_an() << "\n";
  out << std::setprecision(17);
  for (int n = 0; n < t.n_rrh(); ++n)
    out << "rrh " << t.rrh_positions(n, 0) << " " << t.rrh_positions(n, 1) << "\n";
  for (int m = 0; m < t.n_an(); ++m)
    out << "an " << t.an_positions(m, 0) << " " << t.an_positions(m, 1) << "\n";
  for (int n = 0; n < t.n_rrh(); ++n) out << "weight " << t.weights[n] << "\n";
  if (!out) throw std::runtime_error("save_topology: write failed for " + path);
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_topology: cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header != kTopologyHeader)
    throw std::runtime_error("load_topology: bad header in " + path);
  int n = 0, m = 0;
  in >> n >> m;
  if (!in || n < 1 || m < 1)
    throw std::runtime_error("load_topology: bad sizes in " + path);

  Topology t;
  t.rrh_positions.resize(n, 2);
  t.an_positions.resize(m, 2);
  t.weights.resize(n);
  std::string tag;
  for (int i = 0; i < n; ++i) {
    in >> tag >> t.rrh_positions(i, 0) >> t.rrh_positions(i, 1);
    if (!in || tag != "rrh")
      throw std::runtime_error("load_topology: malformed rrh line in " + path);
  }
  for (int i = 0; i < m; ++i) {
    in >> tag >> t.an_positions(i, 0) >> t.an_positions(i, 1);
    if (!in || tag != "an")
      throw std::runtime_error("load_topology: malformed an line in " + path);
  }
  for (int i = 0; i < n; ++i) {
    in >> tag >> t.weights[i];
    if (!in || tag != "weight")
      throw std::runtime_error("load_topology: malformed weight line in " + path);
  }
  return t;
}

}  // namespace fsoalloc
