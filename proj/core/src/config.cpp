#include "fsoalloc/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fsoalloc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> tokenize(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config: empty key or value on line " +
                               std::to_string(lineno));
    if (kv.count(key))
      throw std::runtime_error("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) {
    seen_.push_back(key);
    return kv_.count(key) > 0;
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return parse<T>(key, kv_.at(key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) {
      missing_.push_back(key);
      return T{};
    }
    return parse<T>(key, kv_.at(key));
  }

  void finish() const {
    std::string msg;
    if (!missing_.empty()) {
      msg += "config: missing required key(s):";
      for (const auto& k : missing_) msg += " " + k;
    }
    std::vector<std::string> unknown;
    for (const auto& [k, v] : kv_) {
      bool found = false;
      for (const auto& s : seen_)
        if (s == k) { found = true; break; }
      if (!found) unknown.push_back(k);
    }
    if (!unknown.empty()) {
      if (!msg.empty()) msg += "; ";
      msg += "config: unknown key(s):";
      for (const auto& k : unknown) msg += " " + k;
    }
    if (!msg.empty()) throw std::runtime_error(msg);
  }

 private:
  template <class T>
  T parse(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
      throw std::runtime_error("config: malformed value for key '" + key +
                               "': " + value);
    return out;
  }

  std::map<std::string, std::string> kv_;
  std::vector<std::string> seen_;
  std::vector<std::string> missing_;
};

}  // namespace

void RunConfig::validate() const {
  if (n_rrh < 1 || n_an < 1)
    throw std::runtime_error("config: n_rrh and n_an must be >= 1");
  if (eval_samples < 1)
    throw std::runtime_error("config: eval_samples must be >= 1");
  if (restarts < 1) throw std::runtime_error("config: restarts must be >= 1");
  if (!(feas_tol_frac >= 0.0))
    throw std::runtime_error("config: feas_tol_frac must be >= 0");
  train.validate();
  fading.validate();
  gnn().validate();
}

RunConfig parse_config_text(const std::string& text) {
  Reader r(tokenize(text));
  RunConfig cfg;

  cfg.n_rrh = r.require<int>("n_rrh");
  cfg.n_an = r.require<int>("n_an");
  cfg.train.p_total = r.require<double>("p_total");
  cfg.train.p_peak = r.require<double>("p_peak");
  cfg.train.c_cap = r.require<double>("c_cap");

  cfg.topology_seed = r.get<std::uint64_t>("topology_seed", 1);
  cfg.train.train_seed = r.get<std::uint64_t>("train_seed", 7);
  cfg.eval_seed = r.get<std::uint64_t>("eval_seed", 99);
  cfg.train.iterations = r.get<int>("iterations", 5000);
  cfg.train.batch_size = r.get<int>("batch_size", 32);
  cfg.restarts = r.get<int>("restarts", 1);
  cfg.train.adam.lr = r.get<double>("adam_lr", 5e-3);
  cfg.train.adam.beta1 = r.get<double>("adam_beta1", 0.9);
  cfg.train.adam.beta2 = r.get<double>("adam_beta2", 0.999);
  cfg.train.adam.eps = r.get<double>("adam_eps", 1e-8);
  cfg.train.dual_step0 = r.get<double>("dual_step", 0.1);
  cfg.train.dual_decay = r.get<double>("dual_decay", 0.9995);
  cfg.train.lambda_init = r.get<double>("lambda_init", 0.0);
  cfg.train.power_std_frac = r.get<double>("power_std_frac", 0.1);
  cfg.train.allow_idle = r.get<int>("allow_idle", 0) != 0;
  cfg.train.baseline_subtract = r.get<int>("baseline_subtract", 0) != 0;
  cfg.gnn_layers = r.get<int>("gnn_layers", 8);
  cfg.gnn_features = r.get<int>("gnn_features", 1);
  cfg.gnn_filter_order = r.get<int>("gnn_filter_order", 5);
  cfg.fading.attenuation_rate = r.get<double>("atten_rate", 0.2);
  cfg.fading.lognormal_sigma = r.get<double>("fading_sigma", 0.5);
  cfg.fading.snr_gain = r.get<double>("snr_gain", 10.0);
  cfg.fading.bandwidth_scale = r.get<double>("bandwidth", 1.0);
  cfg.eval_samples = r.get<int>("eval_samples", 10000);
  cfg.feas_tol_frac = r.get<double>("feas_tol_frac", 0.02);

  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace fsoalloc
