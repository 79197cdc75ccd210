// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tagscope/evaluation.hpp"
#include "tagscope/io.hpp"
#include "tagscope/tag_mapping.hpp"

namespace tagscope {

/// Pipeline settings. Any field may come from a JSON config file; CLI flags override it.
struct Config {
  std::optional<std::string> corpus_path;
  std::optional<std::string> index_path;
  std::optional<std::string> seed_path;
  std::optional<std::string> mapping_path;
  std::vector<std::string> log_paths;
  double threshold = kDefaultThreshold;
  std::uint64_t min_users = kDefaultMinUsers;
  double min_fraction = kDefaultMinFraction;
  UrlGranularity granularity = UrlGranularity::kHost;
  std::string listen = "127.0.0.1:8080";

  void validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in (0, 1]");
    if (min_users < 1) throw std::invalid_argument("min_users must be at least 1");
    if (!(min_fraction >= 0.0 && min_fraction <= 1.0)) throw std::invalid_argument("min_fraction must lie in [0, 1]");
  }

  MappingOptions mapping_options() const {
    MappingOptions o;
    o.threshold = threshold;
    o.filter.min_users = min_users;
    o.filter.min_fraction = min_fraction;
    return o;
  }
};

inline constexpr const char* kConfigEnvVar = "TAGSCOPE_CONFIG";

inline Config config_from_json(const json& j) {
  Config c;
  const auto opt_string = [&](const char* key, std::optional<std::string>& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::string>();
  };
  opt_string("corpus", c.corpus_path);
  opt_string("index", c.index_path);
  opt_string("seeds", c.seed_path);
  opt_string("mappings", c.mapping_path);
  if (j.contains("logs")) c.log_paths = j.at("logs").get<std::vector<std::string>>();
  if (j.contains("threshold")) c.threshold = j.at("threshold").get<double>();
  if (j.contains("min_users")) c.min_users = j.at("min_users").get<std::uint64_t>();
  if (j.contains("min_fraction")) c.min_fraction = j.at("min_fraction").get<double>();
  if (j.contains("granularity")) {
    auto g = parse_granularity(j.at("granularity").get<std::string>());
    if (!g) throw std::invalid_argument("granularity must be 'host' or 'full'");
    c.granularity = *g;
  }
  if (j.contains("listen")) c.listen = j.at("listen").get<std::string>();
  c.validate();
  return c;
}

inline Config load_config(const std::string& path) {
  auto in = detail::open_input(path);
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
}

/// The file named by TAGSCOPE_CONFIG, or defaults when the variable is unset.
inline Config config_from_environment() {
  const char* path = std::getenv(kConfigEnvVar);
  return path && *path ? load_config(path) : Config{};
}

}  // namespace tagscope
