// core/config.cc

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

#include "core/config.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "core/activations.h"
#include "core/losses.h"
#include "core/optimizer.h"
#include "core/targets.h"

namespace svbn {

namespace {
std::string Trim(const std::string& s) {
  size_t lo = s.find_first_not_of(" \t\r");
  size_t hi = s.find_last_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  return s.substr(lo, hi - lo + 1);
}
}  // namespace

Config Config::Defaults() {
  Config c;
  auto& v = c.values_;
  // paths: audio manifests feed the `features` stage; feature manifests and
  // trial lists default to the corpus the stage directory holds.
  v["paths.audio_train_manifest"] = "";
  v["paths.audio_enroll_manifest"] = "";
  v["paths.audio_test_manifest"] = "";
  v["paths.trials"] = "";

  v["synth.n_speakers"] = "20";
  v["synth.n_phrases"] = "5";
  v["synth.sessions_per_phrase"] = "3";
  v["synth.frames_per_utterance"] = "150";
  v["synth.dim"] = "57";
  v["synth.speaker_scale"] = "1.0";
  v["synth.phrase_scale"] = "1.0";
  v["synth.noise_scale"] = "1.1";
  v["synth.anchors_per_phrase"] = "8";
  v["synth.seed"] = "1234";

  v["frontend.window_ms"] = "25";
  v["frontend.shift_ms"] = "10";
  v["frontend.n_mels"] = "26";
  v["frontend.n_ceps"] = "19";
  v["frontend.fft_size"] = "0";
  v["frontend.log_floor"] = "1e-10";
  v["frontend.vad_aggressiveness"] = "0.4";
  v["frontend.rasta"] = "false";  // reserved, not implemented

  v["targets.scheme"] = "speaker";
  v["targets.context"] = "11";
  v["targets.tcl_classes"] = "10";
  v["targets.stcl_chunk_frames"] = "6";
  v["targets.stcl_seed"] = "17";
  v["targets.apc_shift"] = "5";

  v["net.hidden_layers"] = "6";
  v["net.hidden_width"] = "1024";
  v["net.activation"] = "gelu";
  v["net.embedding_dim"] = "128";
  v["net.gru_layers"] = "3";
  v["net.gru_hidden"] = "64";

  v["train.batch_size"] = "1024";
  v["train.learning_rate"] = "0.001";
  v["train.epochs"] = "30";
  v["train.l2_penalty"] = "0.0001";
  v["train.optimizer"] = "adam";
  v["train.seed"] = "42";
  v["train.classes_per_batch"] = "8";
  v["train.samples_per_class"] = "4";

  v["loss.kind"] = "ce";
  v["loss.lambda"] = "0.003";
  v["loss.gamma"] = "2";
  v["loss.s"] = "64";
  v["loss.m"] = "0.5";
  v["loss.tau"] = "0.5";
  v["loss.triplet_margin"] = "0.2";
  v["loss.center_alpha"] = "0.5";

  v["bottleneck.layers"] = "1";
  v["bottleneck.pca_dim"] = "57";

  v["backend.kind"] = "gmm-ubm";
  v["backend.features"] = "raw";
  v["backend.ubm_components"] = "512";
  v["backend.ubm_iterations"] = "10";
  v["backend.seed"] = "7";
  v["backend.relevance"] = "10";
  v["backend.map_iterations"] = "3";
  v["backend.map_posteriors"] = "adapted";
  v["backend.tv_rank"] = "100";
  v["backend.tv_iterations"] = "10";
  v["backend.plda_iterations"] = "10";

  v["eval.c_miss"] = "10";
  v["eval.c_fa"] = "1";
  v["eval.p_target"] = "0.01";
  v["eval.det_export"] = "true";
  v["eval.scores"] = "";

  v["fuse.inputs"] = "";
  v["fuse.weights"] = "";
  return c;
}

Config Config::Load(const std::string& path) {
  std::ifstream is(path);
  if (!is) Throw(Status::kIo, "cannot open config: " + path);
  Config config = Defaults();
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = Trim(t.substr(1, t.size() - 2));
      if (section.empty())
        Throw(Status::kConfig, path + ":" + std::to_string(line_no) + ": empty section");
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      Throw(Status::kConfig, path + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = Trim(t.substr(0, eq));
    const std::string value = Trim(t.substr(eq + 1));
    if (section.empty())
      Throw(Status::kConfig,
            path + ":" + std::to_string(line_no) + ": key outside any [section]");
    config.Set(section + "." + key, value);
  }
  return config;
}

void Config::Set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) Throw(Status::kConfig, "unknown config key: " + key);
  values_[key] = value;
}

std::string Config::GetString(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) Throw(Status::kConfig, "unknown config key: " + key);
  return it->second;
}

double Config::GetDouble(const std::string& key) const {
  const std::string s = GetString(key);
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    Throw(Status::kConfig, "config " + key + ": not a number: '" + s + "'");
  }
}

int Config::GetInt(const std::string& key) const {
  const double v = GetDouble(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    Throw(Status::kConfig, "config " + key + ": not an integer");
  return i;
}

uint64_t Config::GetUint64(const std::string& key) const {
  const std::string s = GetString(key);
  try {
    size_t used = 0;
    const uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    Throw(Status::kConfig, "config " + key + ": not an unsigned integer: '" + s + "'");
  }
}

bool Config::GetBool(const std::string& key) const {
  const std::string s = GetString(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  Throw(Status::kConfig, "config " + key + ": not a boolean: '" + s + "'");
}

std::vector<std::string> Config::GetStringList(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream is(GetString(key));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> Config::GetIntList(const std::string& key) const {
  std::vector<int> out;
  for (const auto& s : GetStringList(key)) {
    try {
      out.push_back(std::stoi(s));
    } catch (const std::exception&) {
      Throw(Status::kConfig, "config " + key + ": not an integer list");
    }
  }
  return out;
}

std::vector<double> Config::GetDoubleList(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : GetStringList(key)) {
    try {
      out.push_back(std::stod(s));
    } catch (const std::exception&) {
      Throw(Status::kConfig, "config " + key + ": not a number list");
    }
  }
  return out;
}

std::string Config::CanonicalSerialization() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << '=' << value << '\n';
  return os.str();
}

uint64_t Config::Hash() const { return Fnv1a64(CanonicalSerialization()); }

void Config::Save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) Throw(Status::kIo, "cannot write config: " + path);
  std::string section;
  for (const auto& [key, value] : values_) {
    const size_t dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

void Config::Validate() const {
  const TargetScheme scheme = ParseTargetScheme(GetString("targets.scheme"));
  const LossKind loss = ParseLossKind(GetString("loss.kind"));
  if (scheme == TargetScheme::kApc && loss != LossKind::kL1Apc)
    Throw(Status::kConfig, "targets.scheme=apc requires loss.kind=l1_apc");
  if (loss == LossKind::kL1Apc && scheme != TargetScheme::kApc)
    Throw(Status::kConfig, "loss.kind=l1_apc requires targets.scheme=apc");

  const int context = GetInt("targets.context");
  if (context < 1 || context % 2 == 0)
    Throw(Status::kConfig, "targets.context must be odd and >= 1");

  if (GetBool("frontend.rasta"))
    Throw(Status::kConfig, "frontend.rasta is reserved and not implemented");
  const double vad = GetDouble("frontend.vad_aggressiveness");
  if (!(vad > 0.0 && vad < 1.0))
    Throw(Status::kConfig, "frontend.vad_aggressiveness must be in (0,1)");
  if (GetInt("frontend.n_ceps") > GetInt("frontend.n_mels"))
    Throw(Status::kConfig, "frontend.n_ceps must be <= frontend.n_mels");

  const std::string backend = GetString("backend.kind");
  if (backend != "gmm-ubm" && backend != "ivector-plda")
    Throw(Status::kConfig, "backend.kind must be gmm-ubm or ivector-plda");
  const std::string features = GetString("backend.features");
  if (features != "raw" && features != "bottleneck")
    Throw(Status::kConfig, "backend.features must be raw or bottleneck");
  const std::string map_post = GetString("backend.map_posteriors");
  if (map_post != "adapted" && map_post != "ubm")
    Throw(Status::kConfig, "backend.map_posteriors must be adapted or ubm");

  TrainConfig train;
  train.batch_size = GetInt("train.batch_size");
  train.learning_rate = GetDouble("train.learning_rate");
  train.epochs = GetInt("train.epochs");
  train.l2_penalty = GetDouble("train.l2_penalty");
  train.Validate();
  ParseOptimizerKind(GetString("train.optimizer"));
  ParseActivation(GetString("net.activation"));

  LossHyper hyper;
  hyper.lambda = GetDouble("loss.lambda");
  hyper.gamma = GetDouble("loss.gamma");
  hyper.scale_s = GetDouble("loss.s");
  hyper.margin_m = GetDouble("loss.m");
  hyper.tau = GetDouble("loss.tau");
  hyper.triplet_margin = GetDouble("loss.triplet_margin");
  hyper.Validate(loss);

  if ((loss == LossKind::kTripletCos || loss == LossKind::kTripletEuc ||
       loss == LossKind::kNtxent) &&
      GetInt("train.samples_per_class") < 2)
    Throw(Status::kConfig, "triplet/ntxent need train.samples_per_class >= 2");

  const std::vector<int> layers = GetIntList("bottleneck.layers");
  if (layers.empty()) Throw(Status::kConfig, "bottleneck.layers must list >= 1 layer");
  const int max_layer =
      scheme == TargetScheme::kApc ? GetInt("net.gru_layers") : GetInt("net.hidden_layers");
  for (int l : layers)
    if (l < 1 || l > max_layer)
      Throw(Status::kConfig, "bottleneck.layers entry out of range 1.." +
                                 std::to_string(max_layer));

  if (GetInt("synth.n_speakers") < 2)
    Throw(Status::kConfig, "synth.n_speakers must be >= 2");
  for (const char* key : {"synth.n_phrases", "synth.sessions_per_phrase",
                          "synth.frames_per_utterance", "synth.dim"})
    if (GetInt(key) < 1) Throw(Status::kConfig, std::string(key) + " must be positive");

  const double p_target = GetDouble("eval.p_target");
  if (!(p_target > 0.0 && p_target < 1.0))
    Throw(Status::kConfig, "eval.p_target must be in (0,1)");
  if (GetDouble("eval.c_miss") <= 0.0 || GetDouble("eval.c_fa") <= 0.0)
    Throw(Status::kConfig, "eval costs must be positive");
}

}  // namespace svbn
