// core/config.h

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SVBN_CORE_CONFIG_H_
#define SVBN_CORE_CONFIG_H_

#include <map>
#include <string>
#include <vector>

#include "core/common.h"

namespace svbn {

// Flat key-value configuration: INI-style sections, one level deep, keys
// addressed as "section.key". Unknown keys are configuration errors so typos
// fail before a stage runs.
class Config {
 public:
  static Config Defaults();
  static Config Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  std::string GetString(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  int GetInt(const std::string& key) const;
  uint64_t GetUint64(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  std::vector<int> GetIntList(const std::string& key) const;       // comma-separated
  std::vector<std::string> GetStringList(const std::string& key) const;
  std::vector<double> GetDoubleList(const std::string& key) const;

  // Sorted "key=value" lines; the basis of the provenance hash.
  std::string CanonicalSerialization() const;
  uint64_t Hash() const;

  void Save(const std::string& path) const;

  // Cross-field consistency; throws kConfig on violation.
  void Validate() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace svbn

#endif  // SVBN_CORE_CONFIG_H_
