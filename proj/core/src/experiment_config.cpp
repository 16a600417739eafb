#include "ugcl/experiment_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ugcl/rng.hpp"

namespace ugcl {

graph::SbmSpec SbmFixture::spec() const {
  graph::SbmSpec s;
  s.nodes_per_block = nodes_per_block;
  s.blocks = blocks;
  s.p_in = p_in;
  s.p_out = p_out;
  s.noise_sd = noise_sd;
  s.seed = seed;
  s.feature_means = nn::DenseMatrix(blocks, dim);
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t j = 0; j < dim; ++j) s.feature_means(b, j) = j % blocks == b ? mean_shift : 0.0;
  return s;
}

std::vector<std::pair<double, double>> ExperimentConfig::rate_pairs() const {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < feature_missing_rates.size(); ++i)
    out.emplace_back(feature_missing_rates[i],
                     edge_missing_rates.empty() ? feature_missing_rates[i] : edge_missing_rates[i]);
  return out;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("dataset is required");
  if (feature_missing_rates.empty()) throw ConfigError("at least one missing rate is required");
  if (!edge_missing_rates.empty() && edge_missing_rates.size() != feature_missing_rates.size())
    throw ConfigError("edge_missing needs as many entries as feature_missing");
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!std::all_of(feature_missing_rates.begin(), feature_missing_rates.end(), in_unit) ||
      !std::all_of(edge_missing_rates.begin(), edge_missing_rates.end(), in_unit))
    throw ConfigError("missing rates must lie in [0, 1]");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  try {
    if (baseline != BaselineMode::kOnly) ugcl.validate();
    downstream.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (dataset == "sbm") {
    if (sbm.blocks == 0 || sbm.nodes_per_block < 5 || sbm.dim == 0)
      throw ConfigError("sbm fixture needs blocks >= 1, nodes_per_block >= 5, dim >= 1");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("bad value '" + std::string(text) + "' for " + std::string(key));
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("bad boolean '" + s + "' for " + std::string(key));
}

std::vector<double> parse_rates(std::string_view key, std::string_view text) {
  std::vector<double> out;
  for (const auto& piece : split_list(text)) out.push_back(parse_number<double>(key, piece));
  return out;
}

std::vector<std::uint64_t> parse_seeds(std::string_view key, std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& piece : split_list(text)) {
    const auto dash = piece.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_number<std::uint64_t>(key, piece));
    } else {
      const auto lo = parse_number<std::uint64_t>(key, std::string_view(piece).substr(0, dash));
      const auto hi = parse_number<std::uint64_t>(key, std::string_view(piece).substr(dash + 1));
      if (hi < lo) throw ConfigError("empty seed range '" + piece + "'");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += f(items[i]);
  }
  return out;
}

struct KeyHandler {
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool affects_results = true;
};

template <typename Ref>
KeyHandler real(Ref ref) {
  return {[ref](ExperimentConfig& c, std::string_view k, std::string_view v) { ref(c) = parse_number<double>(k, v); },
          [ref](const ExperimentConfig& c) { return fmt(ref(c)); }};
}

template <typename Ref>
KeyHandler count(Ref ref) {
  return {[ref](ExperimentConfig& c, std::string_view k, std::string_view v) {
            ref(c) = parse_number<std::size_t>(k, v);
          },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
}

const char* optim_name(nn::OptimMethod m) { return m == nn::OptimMethod::kAdam ? "adam" : "sgd"; }

nn::OptimMethod parse_optim(std::string_view key, std::string_view v) {
  const std::string s = trim(v);
  if (s == "adam") return nn::OptimMethod::kAdam;
  if (s == "sgd") return nn::OptimMethod::kSgd;
  throw ConfigError("bad optimizer '" + s + "' for " + std::string(key) + " (adam|sgd)");
}

const std::map<std::string, KeyHandler, std::less<>>& handlers() {
  static const auto* table = [] {
    auto* m = new std::map<std::string, KeyHandler, std::less<>>();
    auto& t = *m;
    t["dataset"] = {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.dataset = trim(v); },
                    [](const ExperimentConfig& c) { return c.dataset; }};
    t["feature_missing"] = {
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.feature_missing_rates = parse_rates(k, v); },
        [](const ExperimentConfig& c) { return join<double>(c.feature_missing_rates, fmt); }};
    t["edge_missing"] = {
        [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.edge_missing_rates = parse_rates(k, v); },
        [](const ExperimentConfig& c) { return join<double>(c.edge_missing_rates, fmt); }};
    t["mask_mode"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                        const std::string s = trim(v);
                        if (s == "entry") c.mask_mode = graph::FeatureMaskMode::kEntry;
                        else if (s == "row") c.mask_mode = graph::FeatureMaskMode::kRow;
                        else throw ConfigError("bad value '" + s + "' for " + std::string(k) + " (entry|row)");
                      },
                      [](const ExperimentConfig& c) {
                        return std::string(c.mask_mode == graph::FeatureMaskMode::kEntry ? "entry" : "row");
                      }};
    t["alpha"] = real([](auto& c) -> auto& { return c.ugcl.ppr.alpha; });
    t["k"] = count([](auto& c) -> auto& { return c.ugcl.ppr.k; });
    t["ppr_method"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                         const std::string s = trim(v);
                         if (s == "closed_form") c.ugcl.ppr.method = PprMethod::kClosedForm;
                         else if (s == "power_iteration") c.ugcl.ppr.method = PprMethod::kPowerIteration;
                         else throw ConfigError("bad value '" + s + "' for " + std::string(k));
                       },
                       [](const ExperimentConfig& c) {
                         return std::string(c.ugcl.ppr.method == PprMethod::kClosedForm ? "closed_form" : "power_iteration");
                       }};
    t["ppr_tol"] = real([](auto& c) -> auto& { return c.ugcl.ppr.tol; });
    t["ppr_max_iter"] = count([](auto& c) -> auto& { return c.ugcl.ppr.max_iter; });
    t["temperature"] = real([](auto& c) -> auto& { return c.ugcl.contrastive.temperature; });
    t["epochs"] = count([](auto& c) -> auto& { return c.ugcl.epochs; });
    t["ugcl_lr"] = real([](auto& c) -> auto& { return c.ugcl.optim.learning_rate; });
    t["ugcl_weight_decay"] = real([](auto& c) -> auto& { return c.ugcl.optim.weight_decay; });
    t["ugcl_dropout"] = real([](auto& c) -> auto& { return c.ugcl.dropout; });
    t["ugcl_optimizer"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                             c.ugcl.optim.method = parse_optim(k, v);
                           },
                           [](const ExperimentConfig& c) { return std::string(optim_name(c.ugcl.optim.method)); }};
    t["imputer_hidden"] = count([](auto& c) -> auto& { return c.ugcl.dims.imputer_hidden; });
    t["pe_dim"] = count([](auto& c) -> auto& { return c.ugcl.dims.pe_dim; });
    t["ppnp_hidden"] = count([](auto& c) -> auto& { return c.ugcl.dims.ppnp_hidden; });
    t["gcn_hidden"] = count([](auto& c) -> auto& { return c.downstream.hidden; });
    t["attention_dim"] = count([](auto& c) -> auto& { return c.downstream.attention_dim; });
    t["downstream_lr"] = real([](auto& c) -> auto& { return c.downstream.optim.learning_rate; });
    t["downstream_weight_decay"] = real([](auto& c) -> auto& { return c.downstream.optim.weight_decay; });
    t["downstream_dropout"] = real([](auto& c) -> auto& { return c.downstream.dropout; });
    t["downstream_optimizer"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                   c.downstream.optim.method = parse_optim(k, v);
                                 },
                                 [](const ExperimentConfig& c) { return std::string(optim_name(c.downstream.optim.method)); }};
    t["downstream_max_epochs"] = count([](auto& c) -> auto& { return c.downstream.max_epochs; });
    t["patience"] = count([](auto& c) -> auto& { return c.downstream.patience; });
    t["seeds"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.seeds = parse_seeds(k, v); },
                  [](const ExperimentConfig& c) {
                    return join<std::uint64_t>(c.seeds, [](const std::uint64_t& s) { return std::to_string(s); });
                  }};
    t["baseline"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                       const std::string s = trim(v);
                       if (s == "off") c.baseline = BaselineMode::kOff;
                       else if (s == "with") c.baseline = BaselineMode::kWith;
                       else if (s == "only") c.baseline = BaselineMode::kOnly;
                       else throw ConfigError("bad value '" + s + "' for " + std::string(k) + " (off|with|only)");
                     },
                     [](const ExperimentConfig& c) {
                       switch (c.baseline) {
                         case BaselineMode::kOff: return std::string("off");
                         case BaselineMode::kWith: return std::string("with");
                         case BaselineMode::kOnly: break;
                       }
                       return std::string("only");
                     }};
    t["sbm_nodes_per_block"] = count([](auto& c) -> auto& { return c.sbm.nodes_per_block; });
    t["sbm_blocks"] = count([](auto& c) -> auto& { return c.sbm.blocks; });
    t["sbm_p_in"] = real([](auto& c) -> auto& { return c.sbm.p_in; });
    t["sbm_p_out"] = real([](auto& c) -> auto& { return c.sbm.p_out; });
    t["sbm_dim"] = count([](auto& c) -> auto& { return c.sbm.dim; });
    t["sbm_noise_sd"] = real([](auto& c) -> auto& { return c.sbm.noise_sd; });
    t["sbm_mean_shift"] = real([](auto& c) -> auto& { return c.sbm.mean_shift; });
    t["sbm_seed"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                       c.sbm.seed = parse_number<std::uint64_t>(k, v);
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.sbm.seed); }};

    KeyHandler out{[](ExperimentConfig& c, std::string_view, std::string_view v) { c.out_dir = trim(v); },
                   [](const ExperimentConfig& c) { return c.out_dir.string(); }, false};
    t["out"] = out;
    t["dump_embeddings"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                              c.dump_embeddings = parse_bool(k, v);
                            },
                            [](const ExperimentConfig& c) { return std::string(c.dump_embeddings ? "true" : "false"); },
                            false};
    t["dump_structure"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                             c.dump_structure = parse_bool(k, v);
                           },
                           [](const ExperimentConfig& c) { return std::string(c.dump_structure ? "true" : "false"); },
                           false};
    t["workers"] = count([](auto& c) -> auto& { return c.workers; });
    t["workers"].affects_results = false;
    return m;
  }();
  return *table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, h] : handlers()) out.push_back(k);
    return out;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  auto it = handlers().find(key);
  if (it == handlers().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second.set(config, key, value);
}

std::string get_config_value(const ExperimentConfig& config, std::string_view key) {
  auto it = handlers().find(key);
  if (it == handlers().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second.get(config);
}

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.filename().string() + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      set_config_value(config, trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string canonical_config(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const auto& [key, h] : handlers()) {
    if (!h.affects_results) continue;
    if (config.dataset != "sbm" && key.starts_with("sbm_")) continue;
    os << key << '=' << h.get(config) << '\n';
  }
  return os.str();
}

std::string config_digest(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_config(config))));
  return buf;
}

}  // namespace ugcl
