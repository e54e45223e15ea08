// Copyright 2026 The vpe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vpe/config.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vpe {

namespace {

enum class KeyType { kDouble, kInt, kBool, kString, kIntList };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* def;
  double min = -1e300;
  double max = 1e300;
  const char* choices = nullptr;  // '|'-separated, for kString
};

const KeySpec kSchema[] = {
    {"camera.model", KeyType::kString, "pinhole", 0, 0, "pinhole|unified"},
    {"camera.f", KeyType::kDouble, "0", 0.0, 1e9},  // 0 = derive from fov
    {"camera.alpha", KeyType::kDouble, "0", 0.0, 0.999999},
    {"camera.width", KeyType::kDouble, "0", 0.0, 1e9},
    {"camera.height", KeyType::kDouble, "0", 0.0, 1e9},
    {"camera.fov_deg", KeyType::kDouble, "60", 1.0, 179.0},
    {"keyframe.threshold", KeyType::kDouble, "2.4", 0.0, 1e9},
    {"keyframe.window", KeyType::kInt, "8", 1, 1024},
    {"graph.temporal_distance", KeyType::kInt, "3", 0, 1024},
    {"graph.covis_threshold", KeyType::kDouble, "0.5", 0.0, 1.0},
    {"rig.covis_threshold", KeyType::kDouble, "0.3", 0.0, 1.0},
    {"ba.alpha_reg", KeyType::kDouble, "0.05", 0.0, 1e9},
    {"ba.huber_delta", KeyType::kDouble, "0", 0.0, 1e9},
    {"terms.dense", KeyType::kBool, "true"},
    {"terms.sparse", KeyType::kBool, "true"},
    {"terms.depth_reg", KeyType::kBool, "true"},
    {"terms.mask", KeyType::kBool, "true"},
    {"solver.frontend_iters", KeyType::kInt, "10", 1, 1000},
    {"solver.backend_iters", KeyType::kInt, "16", 1, 1000},
    {"solver.step_tol", KeyType::kDouble, "1e-6", 0.0, 1.0},
    {"solver.lambda_init", KeyType::kDouble, "1e-4", 0.0, 1e12},
    {"solver.threads", KeyType::kInt, "0", 0, 4096},
    {"solver.optimize_intrinsics", KeyType::kBool, "true"},
    {"backend.schedule", KeyType::kIntList, "8,16,64"},
    {"align.momentum", KeyType::kDouble, "0.9", 0.0, 0.999999},
    {"align.tau_px", KeyType::kDouble, "2", 0.0, 1e6},
    {"align.tau_rel", KeyType::kDouble, "0.05", 0.0, 1e6},
    {"align.coverage_lo", KeyType::kDouble, "0.005", 0.0, 1.0},
    {"align.coverage_hi", KeyType::kDouble, "0.20", 0.0, 1.0},
    {"align.neighbors", KeyType::kInt, "4", 1, 1024},
    {"prior.scale_conditioned", KeyType::kBool, "false"},
    {"seed", KeyType::kInt, "0", 0, 2147483647},
    {"sim.frames", KeyType::kInt, "100", 2, 100000},
    {"sim.width", KeyType::kInt, "320", 16, 8192},
    {"sim.height", KeyType::kInt, "240", 16, 8192},
    {"sim.fov_deg", KeyType::kDouble, "60", 1.0, 179.0},
    {"sim.flow_sigma", KeyType::kDouble, "0", 0.0, 100.0},
    {"sim.track_sigma", KeyType::kDouble, "0", 0.0, 100.0},
    {"sim.tracks_per_pair", KeyType::kInt, "48", 0, 100000},
    {"sim.flow_radius", KeyType::kInt, "32", 1, 100000},
    {"sim.sprinkle", KeyType::kInt, "500", 0, 1000000},
    {"sim.dynamic", KeyType::kBool, "false"},
    {"sim.dynamic_size", KeyType::kDouble, "1.0", 0.01, 100.0},
    {"sim.palindrome", KeyType::kBool, "false"},
    {"sim.emit_frames", KeyType::kBool, "false"},
    {"sim.vda_alpha", KeyType::kDouble, "1", 1e-6, 1e6},
    {"sim.vda_beta", KeyType::kDouble, "0", -1e6, 1e6},
    {"sim.motion_scale", KeyType::kDouble, "1.0", 0.0, 100.0},
    {"out.ply", KeyType::kBool, "false"},
};

const KeySpec* find_spec(const std::string& key) {
  for (const KeySpec& s : kSchema) {
    if (key == s.name) return &s;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, bool* out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    *out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    *out = false;
    return true;
  }
  return false;
}

void validate(const KeySpec& spec, const std::string& value, const std::string& where) {
  auto bad = [&](const std::string& why) {
    fail("ConfigError", where + ": key '" + std::string(spec.name) + "': " + why);
  };
  switch (spec.type) {
    case KeyType::kDouble: {
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0') bad("expected a number, got '" + value + "'");
      if (!(v >= spec.min && v <= spec.max)) bad("value " + value + " out of range");
      break;
    }
    case KeyType::kInt: {
      char* end = nullptr;
      const long v = std::strtol(value.c_str(), &end, 10);
      if (end == value.c_str() || *end != '\0') bad("expected an integer, got '" + value + "'");
      if (!(v >= spec.min && v <= spec.max)) bad("value " + value + " out of range");
      break;
    }
    case KeyType::kBool: {
      bool b;
      if (!parse_bool(value, &b)) bad("expected a boolean, got '" + value + "'");
      break;
    }
    case KeyType::kString: {
      if (spec.choices) {
        std::stringstream ss(spec.choices);
        std::string item;
        while (std::getline(ss, item, '|')) {
          if (item == value) return;
        }
        bad("'" + value + "' is not one of {" + spec.choices + "}");
      }
      break;
    }
    case KeyType::kIntList: {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        char* end = nullptr;
        std::strtol(item.c_str(), &end, 10);
        if (item.empty() || end == item.c_str() || *end != '\0') {
          bad("expected comma-separated integers, got '" + value + "'");
        }
      }
      break;
    }
  }
}

}  // namespace

RunConfig::RunConfig() = default;

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail("IOError", path + ": cannot open");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str(), path);
}

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      fail("ConfigError", where + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_spec(key);
    if (!spec) fail("ConfigError", where + ": unknown key '" + key + "'");
    validate(*spec, value, where);
    cfg.values_[key] = value;
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) fail("ConfigError", "unknown key '" + key + "'");
  validate(*spec, value, "<override>");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const KeySpec* spec = find_spec(key);
  if (!spec) fail("ConfigError", "unknown key '" + key + "'");
  static thread_local std::string def;
  def = spec->def;
  return def;
}

double RunConfig::get_double(const std::string& key) const {
  return std::strtod(raw(key).c_str(), nullptr);
}

int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(std::strtol(raw(key).c_str(), nullptr, 10));
}

bool RunConfig::get_bool(const std::string& key) const {
  bool b = false;
  parse_bool(raw(key), &b);
  return b;
}

std::string RunConfig::get_string(const std::string& key) const { return raw(key); }

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(static_cast<int>(std::strtol(item.c_str(), nullptr, 10)));
  }
  return out;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> keys;
  for (const KeySpec& s : kSchema) keys.push_back(s.name);
  return keys;
}

}  // namespace vpe
