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

#pragma once

#include <map>
#include <string>
#include <vector>

#include "vpe/common.h"

namespace vpe {

// Plain-text "key = value" configuration with '#' comments and dotted keys.
// Keys must be registered in the schema; unknown keys raise ConfigError with
// the offending line number.
class RunConfig {
 public:
  RunConfig();  // defaults only

  static RunConfig load(const std::string& path);
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");

  void set(const std::string& key, const std::string& value);  // validates

  bool has(const std::string& key) const;  // explicitly set (not a default)
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;  // comma separated

  static std::vector<std::string> known_keys();

 private:
  std::map<std::string, std::string> values_;
  const std::string& raw(const std::string& key) const;
};

}  // namespace vpe
