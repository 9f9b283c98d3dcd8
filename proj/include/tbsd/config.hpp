#pragma once

// Run configuration: every tunable of the pipeline under a flat key.
// Precedence is defaults < config file < explicit overrides.

#include "tbsd/anomaly_detect.hpp"
#include "tbsd/texture_learning.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace tbsd {

struct RunConfig {
  // lambda, gamma and iter_times are shared by training and detection.
  DetectionParams detection;
  LearnParams learn;
  int close_max_rotate = 36;
  int close_dmax = 20;

  // Throws InvalidArgument on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);

  // Lines of `key = value` (`#` starts a comment), or a JSON object such as
  // the one to_json() writes.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text);

  nlohmann::ordered_json to_json() const;

  static const std::vector<std::string>& keys();
  static std::string help(const std::string& key);
};

}  // namespace tbsd
