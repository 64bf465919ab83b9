// core/pipeline.cc

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

#include "core/pipeline.h"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "core/eval.h"
#include "core/features.h"
#include "core/manifest.h"
#include "core/mfcc.h"
#include "core/model_io.h"
#include "core/synth.h"
#include "core/targets.h"
#include "core/trainer.h"
#include "core/vad.h"

namespace svbn {

namespace fs = std::filesystem;

namespace {

struct Paths {
  fs::path root;
  explicit Paths(const std::string& stage_dir) : root(stage_dir) {}

  fs::path Corpus() const { return root / "corpus"; }
  fs::path Manifest(const std::string& split) const {
    return Corpus() / (split + "_manifest.tsv");
  }
  fs::path Trials() const { return Corpus() / "trials.tsv"; }
  fs::path TargetsDir() const { return root / "targets"; }
  fs::path Dnn() const { return root / "dnn.bnm"; }
  fs::path BnDir() const { return root / "bn"; }
  fs::path BnManifest(const std::string& split) const {
    return BnDir() / (split + "_manifest.tsv");
  }
  fs::path Pca() const { return root / "pca.bnp"; }
  fs::path Ubm() const { return root / "ubm.bng"; }
  fs::path Tv() const { return root / "tv.bnt"; }
  fs::path Plda() const { return root / "plda.bnpl"; }
  fs::path Enrolled() const { return root / "enroll" / "enrolled.dat"; }
  fs::path Scores() const { return root / "scores.tsv"; }
  fs::path ReportDir() const { return root / "report"; }
  fs::path Prov(const std::string& stage) const {
    return root / "prov" / (stage + ".prov");
  }
  fs::path Lock() const { return root / ".lock"; }
};

class DirLock {
 public:
  explicit DirLock(const fs::path& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      Throw(Status::kDependency,
            "stage directory is locked (" + path.string() +
                " exists); another process owns it, or remove a stale lock");
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::string HashHex(uint64_t hash) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

void RequireStageFile(const fs::path& path, const std::string& producing_stage) {
  if (!fs::exists(path))
    Throw(Status::kDependency, "missing " + path.string() + "; run stage '" +
                                   producing_stage + "' first");
}

// Provenance record: config hash plus input-file hashes. Matching record
// means the stage is already done (idempotent no-op).
struct Provenance {
  std::string stage;
  uint64_t config_hash = 0;
  std::vector<std::pair<std::string, uint64_t>> inputs;

  std::string Serialize() const {
    std::ostringstream os;
    os << "stage=" << stage << "\n";
    os << "config_hash=" << HashHex(config_hash) << "\n";
    for (const auto& [path, hash] : inputs)
      os << "input=" << path << ":" << HashHex(hash) << "\n";
    return os.str();
  }
};

Provenance MakeProvenance(const std::string& stage, const Config& config,
                          const std::vector<fs::path>& inputs) {
  Provenance prov;
  prov.stage = stage;
  prov.config_hash = config.Hash();
  for (const auto& path : inputs)
    prov.inputs.push_back({path.string(), Fnv1a64File(path.string())});
  return prov;
}

// done: provenance file exists and matches. stale: exists and differs.
enum class ProvState { kMissing, kDone, kStale };

ProvState CheckProvenance(const Paths& paths, const Provenance& prov) {
  const fs::path file = paths.Prov(prov.stage);
  if (!fs::exists(file)) return ProvState::kMissing;
  std::ifstream is(file);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return buffer.str() == prov.Serialize() ? ProvState::kDone : ProvState::kStale;
}

void WriteProvenance(const Paths& paths, const Provenance& prov) {
  fs::create_directories(paths.Prov(prov.stage).parent_path());
  std::ofstream os(paths.Prov(prov.stage));
  os << prov.Serialize();
  if (!os) Throw(Status::kIo, "cannot write provenance for stage " + prov.stage);
}

SyntheticCorpusSpec SynthSpecFromConfig(const Config& config) {
  SyntheticCorpusSpec spec;
  spec.n_speakers = config.GetInt("synth.n_speakers");
  spec.n_phrases = config.GetInt("synth.n_phrases");
  spec.sessions_per_phrase = config.GetInt("synth.sessions_per_phrase");
  spec.frames_per_utterance = config.GetInt("synth.frames_per_utterance");
  spec.dim = config.GetInt("synth.dim");
  spec.speaker_scale = config.GetDouble("synth.speaker_scale");
  spec.phrase_scale = config.GetDouble("synth.phrase_scale");
  spec.noise_scale = config.GetDouble("synth.noise_scale");
  spec.anchors_per_phrase = config.GetInt("synth.anchors_per_phrase");
  spec.seed = config.GetUint64("synth.seed");
  return spec;
}

// Which feature manifests back the classifier stages.
struct FeatureSource {
  fs::path train, enroll, test;
};

FeatureSource ResolveFeatureSource(const Config& config, const Paths& paths) {
  FeatureSource src;
  if (config.GetString("backend.features") == "bottleneck") {
    src.train = paths.BnManifest("train");
    src.enroll = paths.BnManifest("enroll");
    src.test = paths.BnManifest("test");
    RequireStageFile(src.train, "extract-bn");
  } else {
    src.train = paths.Manifest("train");
    src.enroll = paths.Manifest("enroll");
    src.test = paths.Manifest("test");
    RequireStageFile(src.train, "synth (or features)");
  }
  return src;
}

Matrix StackedFeatures(const CorpusManifest& manifest) {
  std::vector<FeatureSequence> seqs;
  Eigen::Index total = 0;
  Eigen::Index dim = 0;
  for (const auto& entry : manifest.entries) {
    seqs.push_back(ReadFeatures(entry.path, entry.utterance_id));
    total += seqs.back().NumFrames();
    dim = seqs.back().Dim();
  }
  Matrix stacked(total, dim);
  Eigen::Index at = 0;
  for (const auto& seq : seqs) {
    stacked.middleRows(at, seq.NumFrames()) = seq.frames;
    at += seq.NumFrames();
  }
  return stacked;
}

fs::path TrialsPath(const Config& config, const Paths& paths) {
  const std::string configured = config.GetString("paths.trials");
  return configured.empty() ? paths.Trials() : fs::path(configured);
}

// ---------------------------------------------------------------------------
// Enrollment container: "BNE1", kind byte (0 gmm, 1 ivector), then entries.

void SaveEnrolledGmms(const fs::path& path,
                      const std::map<std::string, DiagGmm>& models) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Status::kIo, "cannot write " + path.string());
  io::WriteMagic(os, "BNE1");
  io::WriteU32(os, 1);
  io::WriteByte(os, 0);
  io::WriteU32(os, static_cast<uint32_t>(models.size()));
  for (const auto& [id, gmm] : models) {
    io::WriteU32(os, static_cast<uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    io::WriteU32(os, static_cast<uint32_t>(gmm.NumComponents()));
    io::WriteU32(os, static_cast<uint32_t>(gmm.Dim()));
    for (Eigen::Index i = 0; i < gmm.weights.size(); ++i) io::WriteF64(os, gmm.weights(i));
    for (Eigen::Index i = 0; i < gmm.means.rows(); ++i)
      for (Eigen::Index j = 0; j < gmm.means.cols(); ++j) io::WriteF64(os, gmm.means(i, j));
    for (Eigen::Index i = 0; i < gmm.variances.rows(); ++i)
      for (Eigen::Index j = 0; j < gmm.variances.cols(); ++j)
        io::WriteF64(os, gmm.variances(i, j));
  }
}

std::map<std::string, DiagGmm> LoadEnrolledGmms(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open " + path.string());
  const std::string ctx = path.string();
  io::ExpectMagic(is, "BNE1", ctx);
  io::ReadU32(is, ctx);
  if (io::ReadByte(is, ctx) != 0)
    Throw(Status::kFormat, ctx + ": not a gmm enrollment container");
  const uint32_t count = io::ReadU32(is, ctx);
  std::map<std::string, DiagGmm> models;
  for (uint32_t e = 0; e < count; ++e) {
    const uint32_t id_len = io::ReadU32(is, ctx);
    std::string id(id_len, '\0');
    is.read(id.data(), id_len);
    const uint32_t k = io::ReadU32(is, ctx);
    const uint32_t d = io::ReadU32(is, ctx);
    DiagGmm gmm;
    gmm.weights.resize(k);
    gmm.means.resize(k, d);
    gmm.variances.resize(k, d);
    for (Eigen::Index i = 0; i < gmm.weights.size(); ++i)
      gmm.weights(i) = io::ReadF64(is, ctx);
    for (Eigen::Index i = 0; i < gmm.means.rows(); ++i)
      for (Eigen::Index j = 0; j < gmm.means.cols(); ++j)
        gmm.means(i, j) = io::ReadF64(is, ctx);
    for (Eigen::Index i = 0; i < gmm.variances.rows(); ++i)
      for (Eigen::Index j = 0; j < gmm.variances.cols(); ++j)
        gmm.variances(i, j) = io::ReadF64(is, ctx);
    models[id] = std::move(gmm);
  }
  return models;
}

void SaveEnrolledIvectors(const fs::path& path,
                          const std::map<std::string, Vector>& ivectors) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Status::kIo, "cannot write " + path.string());
  io::WriteMagic(os, "BNE1");
  io::WriteU32(os, 1);
  io::WriteByte(os, 1);
  io::WriteU32(os, static_cast<uint32_t>(ivectors.size()));
  for (const auto& [id, v] : ivectors) {
    io::WriteU32(os, static_cast<uint32_t>(id.size()));
    os.write(id.data(), static_cast<std::streamsize>(id.size()));
    io::WriteU32(os, static_cast<uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) io::WriteF64(os, v(i));
  }
}

std::map<std::string, Vector> LoadEnrolledIvectors(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open " + path.string());
  const std::string ctx = path.string();
  io::ExpectMagic(is, "BNE1", ctx);
  io::ReadU32(is, ctx);
  if (io::ReadByte(is, ctx) != 1)
    Throw(Status::kFormat, ctx + ": not an i-vector enrollment container");
  const uint32_t count = io::ReadU32(is, ctx);
  std::map<std::string, Vector> ivectors;
  for (uint32_t e = 0; e < count; ++e) {
    const uint32_t id_len = io::ReadU32(is, ctx);
    std::string id(id_len, '\0');
    is.read(id.data(), id_len);
    Vector v(io::ReadU32(is, ctx));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = io::ReadF64(is, ctx);
    ivectors[id] = std::move(v);
  }
  return ivectors;
}

// ---------------------------------------------------------------------------
// Stage bodies.

std::string StageSynth(const Config& config, const Paths& paths) {
  const SynthOutput out = SynthCorpus(SynthSpecFromConfig(config), paths.Corpus().string());
  return "synthesized " + std::to_string(out.utterances) + " utterances";
}

std::string StageFeatures(const Config& config, const Paths& paths) {
  struct Split {
    const char* name;
    std::string manifest_key;
  };
  const Split splits[] = {{"train", "paths.audio_train_manifest"},
                          {"enroll", "paths.audio_enroll_manifest"},
                          {"test", "paths.audio_test_manifest"}};
  MfccConfig mfcc_config;
  mfcc_config.window_ms = config.GetDouble("frontend.window_ms");
  mfcc_config.shift_ms = config.GetDouble("frontend.shift_ms");
  mfcc_config.n_mels = config.GetInt("frontend.n_mels");
  mfcc_config.n_ceps = config.GetInt("frontend.n_ceps");
  mfcc_config.fft_size = config.GetInt("frontend.fft_size");
  mfcc_config.log_floor = config.GetDouble("frontend.log_floor");
  const double aggressiveness = config.GetDouble("frontend.vad_aggressiveness");

  fs::create_directories(paths.Corpus() / "features");
  int utterances = 0, dropped = 0;
  std::map<uint32_t, std::unique_ptr<MfccExtractor>> extractors;
  for (const Split& split : splits) {
    const std::string audio_manifest = config.GetString(split.manifest_key);
    if (audio_manifest.empty())
      Throw(Status::kConfig, std::string("features: ") + split.manifest_key +
                                 " is empty; synthetic corpora come from `synth`");
    const CorpusManifest audio = LoadManifest(audio_manifest);
    CorpusManifest out;
    for (const auto& entry : audio.entries) {
      const AudioClip clip = ReadWav(entry.path, entry.utterance_id);
      auto& extractor = extractors[clip.sample_rate_hz];
      if (!extractor)
        extractor = std::make_unique<MfccExtractor>(mfcc_config, clip.sample_rate_hz);
      FeatureSequence mfcc = extractor->Extract(clip);
      const Vector energies =
          FrameEnergies(clip, mfcc_config.window_ms, mfcc_config.shift_ms);
      const std::vector<bool> mask = EnergyVad(energies, aggressiveness);
      FeatureSequence voiced = SelectFrames(mfcc, mask);
      if (voiced.NumFrames() == 0) {
        std::cerr << "features: dropping all-silent utterance " << entry.utterance_id
                  << "\n";
        ++dropped;
        continue;
      }
      CmvnUtterance(&voiced);
      const fs::path out_path =
          paths.Corpus() / "features" / (entry.utterance_id + ".bnf");
      WriteFeatures(out_path.string(), voiced);
      out.entries.push_back({entry.utterance_id, entry.speaker_id, entry.phrase_id,
                             out_path.string()});
      ++utterances;
    }
    SaveManifest(paths.Manifest(split.name).string(), out);
  }
  return "extracted features for " + std::to_string(utterances) + " utterances (" +
         std::to_string(dropped) + " dropped)";
}

std::string StageTargets(const Config& config, const Paths& paths) {
  RequireStageFile(paths.Manifest("train"), "synth (or features)");
  const CorpusManifest manifest = LoadManifest(paths.Manifest("train").string());
  const TargetScheme scheme = ParseTargetScheme(config.GetString("targets.scheme"));
  fs::create_directories(paths.TargetsDir());
  std::ofstream os(paths.TargetsDir() / "targets.tsv");
  os << "scheme\t" << TargetSchemeName(scheme) << "\n";
  int skipped = 0;
  switch (scheme) {
    case TargetScheme::kSpeaker: {
      const auto mapping = LabelSpeakers(manifest);
      for (const auto& [speaker, index] : mapping)
        os << speaker << "\t" << index << "\n";
      break;
    }
    case TargetScheme::kUtcl: {
      const int c = config.GetInt("targets.tcl_classes");
      for (const auto& entry : manifest.entries) {
        const FeatureSequence seq = ReadFeatures(entry.path, entry.utterance_id);
        const std::vector<int> labels = LabelUtcl(seq.NumFrames(), c);
        if (labels.empty()) {
          std::cerr << "targets: skipping " << entry.utterance_id << " (T="
                    << seq.NumFrames() << " < c=" << c << ")\n";
          ++skipped;
          continue;
        }
        os << entry.utterance_id << '\t';
        for (size_t i = 0; i < labels.size(); ++i)
          os << (i ? " " : "") << labels[i];
        os << "\n";
      }
      break;
    }
    case TargetScheme::kStcl: {
      const auto order = StclStreamOrder(manifest.entries.size(),
                                         config.GetUint64("targets.stcl_seed"));
      for (uint32_t index : order) os << manifest.entries[index].utterance_id << "\n";
      break;
    }
    case TargetScheme::kApc:
      os << "shift\t" << config.GetInt("targets.apc_shift") << "\n";
      break;
  }
  if (!os) Throw(Status::kIo, "cannot write targets artifact");
  return "targets ready (" + TargetSchemeName(scheme) + ", " + std::to_string(skipped) +
         " skipped)";
}

TrainConfig TrainConfigFromConfig(const Config& config) {
  TrainConfig train;
  train.batch_size = config.GetInt("train.batch_size");
  train.learning_rate = config.GetDouble("train.learning_rate");
  train.epochs = config.GetInt("train.epochs");
  train.l2_penalty = config.GetDouble("train.l2_penalty");
  train.seed = config.GetUint64("train.seed");
  train.optimizer = ParseOptimizerKind(config.GetString("train.optimizer"));
  return train;
}

LossHyper HyperFromConfig(const Config& config) {
  LossHyper hyper;
  hyper.lambda = config.GetDouble("loss.lambda");
  hyper.gamma = config.GetDouble("loss.gamma");
  hyper.scale_s = config.GetDouble("loss.s");
  hyper.margin_m = config.GetDouble("loss.m");
  hyper.tau = config.GetDouble("loss.tau");
  hyper.triplet_margin = config.GetDouble("loss.triplet_margin");
  hyper.center_alpha = config.GetDouble("loss.center_alpha");
  return hyper;
}

std::string StageTrainDnn(const Config& config, const Paths& paths) {
  RequireStageFile(paths.TargetsDir() / "targets.tsv", "targets");
  const CorpusManifest manifest = LoadManifest(paths.Manifest("train").string());
  const TargetScheme scheme = ParseTargetScheme(config.GetString("targets.scheme"));
  const int context = config.GetInt("targets.context");
  TrainTrace trace;
  NetworkModel model;

  if (scheme == TargetScheme::kApc) {
    std::vector<Matrix> utterances;
    for (const auto& entry : manifest.entries)
      utterances.push_back(ReadFeatures(entry.path, entry.utterance_id).frames);
    ApcTrainOptions options;
    options.gru_layers = config.GetInt("net.gru_layers");
    options.gru_hidden = config.GetInt("net.gru_hidden");
    options.shift = config.GetInt("targets.apc_shift");
    options.train = TrainConfigFromConfig(config);
    model = TrainApcModel(utterances, options, &trace);
  } else {
    // Assemble the spliced frame pool and per-frame labels.
    std::vector<Matrix> spliced;
    std::vector<int> labels;
    int n_classes = 0;
    if (scheme == TargetScheme::kSpeaker) {
      const auto mapping = LabelSpeakers(manifest);
      n_classes = static_cast<int>(mapping.size());
      for (const auto& entry : manifest.entries) {
        const FeatureSequence seq = ReadFeatures(entry.path, entry.utterance_id);
        spliced.push_back(SpliceContext(seq.frames, context));
        labels.insert(labels.end(), seq.NumFrames(), mapping.at(entry.speaker_id));
      }
    } else if (scheme == TargetScheme::kUtcl) {
      n_classes = config.GetInt("targets.tcl_classes");
      for (const auto& entry : manifest.entries) {
        const FeatureSequence seq = ReadFeatures(entry.path, entry.utterance_id);
        const std::vector<int> utt_labels = LabelUtcl(seq.NumFrames(), n_classes);
        if (utt_labels.empty()) {
          ++trace.warnings;
          continue;
        }
        spliced.push_back(SpliceContext(seq.frames, context));
        labels.insert(labels.end(), utt_labels.begin(), utt_labels.end());
      }
    } else {  // stcl
      n_classes = config.GetInt("targets.tcl_classes");
      const int chunk = config.GetInt("targets.stcl_chunk_frames");
      const auto order = StclStreamOrder(manifest.entries.size(),
                                         config.GetUint64("targets.stcl_seed"));
      size_t stream_frame = 0;
      for (uint32_t index : order) {
        const auto& entry = manifest.entries[index];
        const FeatureSequence seq = ReadFeatures(entry.path, entry.utterance_id);
        spliced.push_back(SpliceContext(seq.frames, context));
        for (int t = 0; t < seq.NumFrames(); ++t)
          labels.push_back(StclLabel(stream_frame++, chunk, n_classes));
      }
      if (stream_frame < static_cast<size_t>(n_classes) * chunk)
        Throw(Status::kArg, "stcl: stream shorter than one label cycle");
    }
    Matrix inputs = ConcatRows(spliced);
    DenseTrainOptions options;
    options.hidden_widths.assign(config.GetInt("net.hidden_layers"),
                                 config.GetInt("net.hidden_width"));
    options.activation = ParseActivation(config.GetString("net.activation"));
    options.loss = ParseLossKind(config.GetString("loss.kind"));
    options.hyper = HyperFromConfig(config);
    options.n_classes = n_classes;
    options.embedding_dim = config.GetInt("net.embedding_dim");
    options.train = TrainConfigFromConfig(config);
    options.classes_per_batch = config.GetInt("train.classes_per_batch");
    options.samples_per_class = config.GetInt("train.samples_per_class");
    model = TrainDenseModel(inputs, labels, options, &trace);
  }

  SaveNetworkModel(paths.Dnn().string(), model);
  std::ofstream log(paths.root / "train_dnn_log.txt");
  for (size_t e = 0; e < trace.epoch_losses.size(); ++e)
    log << "epoch " << e << " loss " << trace.epoch_losses[e] << "\n";
  log << "warnings " << trace.warnings << "\n";
  std::ostringstream summary;
  summary << "trained dnn, final epoch loss ";
  summary << (trace.epoch_losses.empty() ? 0.0 : trace.epoch_losses.back());
  return summary.str();
}

std::string StageExtractBn(const Config& config, const Paths& paths) {
  RequireStageFile(paths.Dnn(), "train-dnn");
  const NetworkModel model = LoadNetworkModel(paths.Dnn().string());
  const std::vector<int> layers = config.GetIntList("bottleneck.layers");
  const int pca_dim = config.GetInt("bottleneck.pca_dim");
  const int context = config.GetInt("targets.context");
  const bool dense = model.type == NetworkModel::Type::kDense;

  fs::create_directories(paths.BnDir() / "features");

  auto tap_utterance = [&](const FeatureSequence& seq) {
    const Matrix inputs = dense ? SpliceContext(seq.frames, context) : seq.frames;
    return TapModel(model, layers, inputs);
  };

  // PCA is fit on the backend-training pool.
  const CorpusManifest train = LoadManifest(paths.Manifest("train").string());
  std::vector<Matrix> train_taps;
  for (const auto& entry : train.entries)
    train_taps.push_back(tap_utterance(ReadFeatures(entry.path, entry.utterance_id)));
  const PcaModel pca = PcaFit(ConcatRows(train_taps), pca_dim);
  SavePcaModel(paths.Pca().string(), pca);

  int utterances = 0;
  for (const char* split : {"train", "enroll", "test"}) {
    const CorpusManifest manifest = LoadManifest(paths.Manifest(split).string());
    CorpusManifest out;
    for (const auto& entry : manifest.entries) {
      const FeatureSequence seq = ReadFeatures(entry.path, entry.utterance_id);
      FeatureSequence bn;
      bn.kind = FeatureKind::kBottleneck;
      bn.utterance_id = entry.utterance_id;
      bn.frame_shift_ms = seq.frame_shift_ms;
      bn.frames = PcaProject(pca, tap_utterance(seq));
      const fs::path out_path =
          paths.BnDir() / "features" / (entry.utterance_id + ".bnf");
      WriteFeatures(out_path.string(), bn);
      out.entries.push_back({entry.utterance_id, entry.speaker_id, entry.phrase_id,
                             out_path.string()});
      ++utterances;
    }
    SaveManifest(paths.BnManifest(split).string(), out);
  }
  return "projected " + std::to_string(utterances) + " utterances to " +
         std::to_string(pca_dim) + "-dim bottleneck features";
}

std::string StageTrainUbm(const Config& config, const Paths& paths) {
  const FeatureSource source = ResolveFeatureSource(config, paths);
  const CorpusManifest manifest = LoadManifest(source.train.string());
  const Matrix pool = StackedFeatures(manifest);
  UbmTrainOptions options;
  options.num_components = config.GetInt("backend.ubm_components");
  options.em_iterations = config.GetInt("backend.ubm_iterations");
  options.seed = config.GetUint64("backend.seed");
  UbmTrainStats stats;
  const DiagGmm ubm = UbmTrainEm(pool, options, &stats);
  SaveGmm(paths.Ubm().string(), ubm);
  std::ofstream log(paths.root / "train_ubm_log.txt");
  for (size_t i = 0; i < stats.log_likelihoods.size(); ++i)
    log << "iteration " << i << " avg_ll " << stats.log_likelihoods[i] << "\n";
  log << "reseeded " << stats.reseeded_components << "\n";
  std::ostringstream summary;
  summary << "trained " << options.num_components << "-component ubm on " << pool.rows()
          << " frames";
  return summary.str();
}

std::string StageTrainTv(const Config& config, const Paths& paths) {
  if (config.GetString("backend.kind") != "ivector-plda")
    Throw(Status::kConfig, "train-tv requires backend.kind=ivector-plda");
  RequireStageFile(paths.Ubm(), "train-ubm");
  const DiagGmm ubm = LoadGmm(paths.Ubm().string());
  const FeatureSource source = ResolveFeatureSource(config, paths);
  const CorpusManifest manifest = LoadManifest(source.train.string());
  std::vector<BwStats> stats;
  for (const auto& entry : manifest.entries)
    stats.push_back(ComputeBwStats(ubm, ReadFeatures(entry.path, entry.utterance_id).frames));
  TvTrainOptions options;
  options.rank = config.GetInt("backend.tv_rank");
  options.em_iterations = config.GetInt("backend.tv_iterations");
  options.seed = config.GetUint64("backend.seed") + 1;
  if (static_cast<int>(stats.size()) < options.rank)
    std::cerr << "train-tv: only " << stats.size() << " utterances for rank "
              << options.rank << "; consider lowering backend.tv_rank\n";
  EmTrace trace;
  const TvModel tv = TrainTvMatrix(ubm, stats, options, &trace);
  SaveTvModel(paths.Tv().string(), tv);
  std::ofstream log(paths.root / "train_tv_log.txt");
  for (size_t i = 0; i < trace.objectives.size(); ++i)
    log << "iteration " << i << " objective " << trace.objectives[i] << "\n";
  return "trained rank-" + std::to_string(options.rank) + " total-variability matrix";
}

std::string StageTrainPlda(const Config& config, const Paths& paths) {
  if (config.GetString("backend.kind") != "ivector-plda")
    Throw(Status::kConfig, "train-plda requires backend.kind=ivector-plda");
  RequireStageFile(paths.Tv(), "train-tv");
  const DiagGmm ubm = LoadGmm(paths.Ubm().string());
  const TvModel tv = LoadTvModel(paths.Tv().string());
  const FeatureSource source = ResolveFeatureSource(config, paths);
  const CorpusManifest manifest = LoadManifest(source.train.string());

  std::vector<Vector> raw;
  std::vector<int> labels;
  std::map<std::string, int> class_of;  // (speaker, phrase) pairs are classes
  for (const auto& entry : manifest.entries) {
    raw.push_back(ExtractIvector(
        tv, ComputeBwStats(ubm, ReadFeatures(entry.path, entry.utterance_id).frames)));
    const std::string key = entry.speaker_id + ":" + entry.phrase_id;
    auto [it, inserted] = class_of.insert({key, static_cast<int>(class_of.size())});
    labels.push_back(it->second);
  }
  Vector center = Vector::Zero(tv.Rank());
  for (const auto& v : raw) center += v;
  center /= static_cast<double>(raw.size());
  std::vector<Vector> processed;
  for (const auto& v : raw) processed.push_back(LengthNormalize(v - center));

  EmTrace trace;
  int singletons = 0;
  PldaModel plda = PldaTrain(processed, labels, config.GetInt("backend.plda_iterations"),
                             &trace, &singletons);
  plda.center = center;
  SavePldaModel(paths.Plda().string(), plda);
  std::ofstream log(paths.root / "train_plda_log.txt");
  for (size_t i = 0; i < trace.objectives.size(); ++i)
    log << "iteration " << i << " objective " << trace.objectives[i] << "\n";
  if (singletons > 0) log << "singleton_classes " << singletons << "\n";
  return "trained plda over " + std::to_string(class_of.size()) + " classes";
}

std::string StageEnroll(const Config& config, const Paths& paths) {
  RequireStageFile(paths.Ubm(), "train-ubm");
  const DiagGmm ubm = LoadGmm(paths.Ubm().string());
  const FeatureSource source = ResolveFeatureSource(config, paths);
  const CorpusManifest manifest = LoadManifest(source.enroll.string());

  // Group enrollment sessions by (speaker, phrase).
  std::map<std::string, std::vector<const ManifestEntry*>> groups;
  for (const auto& entry : manifest.entries)
    groups[entry.speaker_id + ":" + entry.phrase_id].push_back(&entry);

  if (config.GetString("backend.kind") == "gmm-ubm") {
    const double relevance = config.GetDouble("backend.relevance");
    const int iterations = config.GetInt("backend.map_iterations");
    const bool from_ubm = config.GetString("backend.map_posteriors") == "ubm";
    std::map<std::string, DiagGmm> models;
    for (const auto& [id, entries] : groups) {
      std::vector<FeatureSequence> seqs;
      Eigen::Index total = 0;
      for (const auto* e : entries) {
        seqs.push_back(ReadFeatures(e->path, e->utterance_id));
        total += seqs.back().NumFrames();
      }
      Matrix frames(total, ubm.Dim());
      Eigen::Index at = 0;
      for (const auto& s : seqs) {
        frames.middleRows(at, s.NumFrames()) = s.frames;
        at += s.NumFrames();
      }
      models[id] = MapAdapt(ubm, frames, relevance, iterations, from_ubm);
    }
    SaveEnrolledGmms(paths.Enrolled(), models);
    return "enrolled " + std::to_string(models.size()) + " speaker models (map)";
  }

  RequireStageFile(paths.Tv(), "train-tv");
  RequireStageFile(paths.Plda(), "train-plda");
  const TvModel tv = LoadTvModel(paths.Tv().string());
  const PldaModel plda = LoadPldaModel(paths.Plda().string());
  std::map<std::string, Vector> enrolled;
  for (const auto& [id, entries] : groups) {
    std::vector<Vector> sessions;
    for (const auto* e : entries) {
      const Vector raw = ExtractIvector(
          tv, ComputeBwStats(ubm, ReadFeatures(e->path, e->utterance_id).frames));
      sessions.push_back(plda.Preprocess(raw));
    }
    enrolled[id] = EnrollSpeakerIvector(sessions);
  }
  SaveEnrolledIvectors(paths.Enrolled(), enrolled);
  return "enrolled " + std::to_string(enrolled.size()) + " speaker i-vectors";
}

std::string StageScore(const Config& config, const Paths& paths) {
  RequireStageFile(paths.Enrolled(), "enroll");
  const fs::path trials_path = TrialsPath(config, paths);
  RequireStageFile(trials_path, "synth (or provide paths.trials)");
  const TrialSet trials = LoadTrials(trials_path.string());
  const FeatureSource source = ResolveFeatureSource(config, paths);
  const CorpusManifest test_manifest = LoadManifest(source.test.string());
  std::map<std::string, const ManifestEntry*> test_index;
  for (const auto& entry : test_manifest.entries)
    test_index[entry.utterance_id] = &entry;

  auto find_test = [&](const std::string& id) -> const ManifestEntry* {
    auto it = test_index.find(id);
    if (it == test_index.end())
      Throw(Status::kDependency, "score: test utterance '" + id + "' not in manifest");
    return it->second;
  };

  ScoreTable scores;
  if (config.GetString("backend.kind") == "gmm-ubm") {
    const DiagGmm ubm = LoadGmm(paths.Ubm().string());
    const auto models = LoadEnrolledGmms(paths.Enrolled());
    // Cache per-utterance features and UBM log-likelihoods across trials.
    std::map<std::string, Matrix> frames_cache;
    std::map<std::string, double> ubm_ll;
    for (const auto& trial : trials.trials) {
      auto model_it = models.find(trial.enroll_id);
      if (model_it == models.end())
        Throw(Status::kDependency, "score: no enrolled model '" + trial.enroll_id + "'");
      auto cached = frames_cache.find(trial.test_id);
      if (cached == frames_cache.end()) {
        const ManifestEntry* entry = find_test(trial.test_id);
        cached = frames_cache
                     .insert({trial.test_id,
                              ReadFeatures(entry->path, entry->utterance_id).frames})
                     .first;
        ubm_ll[trial.test_id] =
            GmmTotalLogLikelihood(ubm, cached->second) / cached->second.rows();
      }
      const double target_ll =
          GmmTotalLogLikelihood(model_it->second, cached->second) / cached->second.rows();
      scores[{trial.enroll_id, trial.test_id}] = target_ll - ubm_ll[trial.test_id];
    }
  } else {
    const DiagGmm ubm = LoadGmm(paths.Ubm().string());
    const TvModel tv = LoadTvModel(paths.Tv().string());
    const PldaModel plda = LoadPldaModel(paths.Plda().string());
    const PldaScorer scorer(plda);
    const auto enrolled = LoadEnrolledIvectors(paths.Enrolled());
    std::map<std::string, Vector> test_cache;
    for (const auto& trial : trials.trials) {
      auto model_it = enrolled.find(trial.enroll_id);
      if (model_it == enrolled.end())
        Throw(Status::kDependency, "score: no enrolled i-vector '" + trial.enroll_id + "'");
      auto cached = test_cache.find(trial.test_id);
      if (cached == test_cache.end()) {
        const ManifestEntry* entry = find_test(trial.test_id);
        const Vector raw = ExtractIvector(
            tv, ComputeBwStats(ubm, ReadFeatures(entry->path, entry->utterance_id).frames));
        cached = test_cache.insert({trial.test_id, plda.Preprocess(raw)}).first;
      }
      scores[{trial.enroll_id, trial.test_id}] = scorer.Score(model_it->second, cached->second);
    }
  }
  SaveScores(paths.Scores().string(), scores);
  return "scored " + std::to_string(scores.size()) + " trials";
}

std::string StageEvaluate(const Config& config, const Paths& paths) {
  const std::string configured = config.GetString("eval.scores");
  const fs::path scores_path = configured.empty() ? paths.Scores() : fs::path(configured);
  RequireStageFile(scores_path, "score");
  const fs::path trials_path = TrialsPath(config, paths);
  RequireStageFile(trials_path, "synth (or provide paths.trials)");

  const TrialSet trials = LoadTrials(trials_path.string());
  const ScoreTable scores = LoadScores(scores_path.string());
  DcfParams dcf;
  dcf.c_miss = config.GetDouble("eval.c_miss");
  dcf.c_fa = config.GetDouble("eval.c_fa");
  dcf.p_target = config.GetDouble("eval.p_target");
  const MetricReport report = Evaluate(trials, scores, dcf);

  fs::create_directories(paths.ReportDir());
  const std::string text = FormatReport(report);
  std::ofstream os(paths.ReportDir() / "report.txt");
  os << text;

  if (config.GetBool("eval.det_export")) {
    std::vector<double> genuine;
    std::map<TrialLabel, std::vector<double>> impostors;
    for (const auto& trial : trials.trials) {
      const double s = scores.at({trial.enroll_id, trial.test_id});
      if (trial.label == TrialLabel::kGenuine) genuine.push_back(s);
      else impostors[trial.label].push_back(s);
    }
    for (const auto& [label, imp] : impostors) {
      const DetExport det = ComputeDetExport(genuine, imp);
      std::ofstream det_os(paths.ReportDir() / ("det_" + TrialLabelName(label) + ".tsv"));
      det_os << "threshold\tfar\tfrr\n";
      for (const auto& p : det.points)
        det_os << p.threshold << '\t' << p.far << '\t' << p.frr << '\n';
      std::ofstream hist_os(paths.ReportDir() /
                            ("hist_" + TrialLabelName(label) + ".tsv"));
      hist_os << "bin_lo\tgenuine\timpostor\n";
      const double width = (det.hist_hi - det.hist_lo) / det.genuine_hist.size();
      for (size_t b = 0; b < det.genuine_hist.size(); ++b)
        hist_os << det.hist_lo + b * width << '\t' << det.genuine_hist[b] << '\t'
                << det.impostor_hist[b] << '\n';
    }
  }
  std::cout << text;
  return "report written";
}

std::string StageFuse(const Config& config, const Paths& paths) {
  const std::vector<std::string> inputs = config.GetStringList("fuse.inputs");
  if (inputs.size() < 2)
    Throw(Status::kConfig, "fuse: need >= 2 score files in fuse.inputs");
  std::vector<ScoreTable> systems;
  for (const auto& path : inputs) {
    if (!fs::exists(path))
      Throw(Status::kDependency, "fuse: missing score file " + path);
    systems.push_back(LoadScores(path));
  }
  const std::vector<double> weights = config.GetDoubleList("fuse.weights");
  const ScoreTable fused = FuseScores(systems, weights);
  fs::create_directories(paths.root / "fuse");
  SaveScores((paths.root / "fuse" / "scores.tsv").string(), fused);
  return "fused " + std::to_string(systems.size()) + " systems over " +
         std::to_string(fused.size()) + " trials";
}

std::vector<fs::path> StageInputs(const std::string& stage, const Config& config,
                                  const Paths& paths) {
  std::vector<fs::path> inputs;
  auto add_if_exists = [&](const fs::path& p) {
    if (fs::exists(p)) inputs.push_back(p);
  };
  if (stage == "targets" || stage == "train-dnn") add_if_exists(paths.Manifest("train"));
  if (stage == "train-dnn") add_if_exists(paths.TargetsDir() / "targets.tsv");
  if (stage == "extract-bn") add_if_exists(paths.Dnn());
  if (stage == "train-ubm") {
    add_if_exists(config.GetString("backend.features") == "bottleneck"
                      ? paths.BnManifest("train")
                      : paths.Manifest("train"));
  }
  if (stage == "train-tv") add_if_exists(paths.Ubm());
  if (stage == "train-plda") add_if_exists(paths.Tv());
  if (stage == "enroll") {
    add_if_exists(paths.Ubm());
    if (config.GetString("backend.kind") == "ivector-plda") {
      add_if_exists(paths.Tv());
      add_if_exists(paths.Plda());
    }
  }
  if (stage == "score") add_if_exists(paths.Enrolled());
  if (stage == "evaluate") {
    const std::string configured = config.GetString("eval.scores");
    add_if_exists(configured.empty() ? paths.Scores() : fs::path(configured));
  }
  if (stage == "fuse")
    for (const auto& p : config.GetStringList("fuse.inputs")) add_if_exists(p);
  return inputs;
}

}  // namespace

const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> names = {
      "synth",    "features", "targets", "train-dnn", "extract-bn", "train-ubm",
      "train-tv", "train-plda", "enroll", "score",     "evaluate",   "fuse"};
  return names;
}

StageResult RunStage(const Config& base_config, const std::string& stage,
                     const StageOptions& options) {
  if (options.stage_dir.empty()) Throw(Status::kConfig, "stage directory required");
  bool known = false;
  for (const auto& name : StageNames()) known = known || name == stage;
  if (!known) Throw(Status::kArg, "unknown stage: " + stage);

  Config config = base_config;
  if (options.seed_override) {
    const std::string seed = std::to_string(*options.seed_override);
    for (const char* key :
         {"synth.seed", "train.seed", "backend.seed", "targets.stcl_seed"})
      config.Set(key, seed);
  }
  config.Validate();

  Paths paths(options.stage_dir);
  fs::create_directories(paths.root);
  DirLock lock(paths.Lock());

  const Provenance prov = MakeProvenance(stage, config, StageInputs(stage, config, paths));
  const ProvState state = CheckProvenance(paths, prov);
  StageResult result;
  if (state == ProvState::kDone && !options.force) {
    result.skipped = true;
    result.summary = "up to date";
    if (!options.quiet) std::cout << "[" << stage << "] up to date\n";
    return result;
  }
  if (state == ProvState::kStale && !options.force)
    Throw(Status::kDependency,
          "stage '" + stage +
              "' artifacts exist with different config/input hashes; rerun with --force "
              "to overwrite");

  if (stage == "synth") result.summary = StageSynth(config, paths);
  else if (stage == "features") result.summary = StageFeatures(config, paths);
  else if (stage == "targets") result.summary = StageTargets(config, paths);
  else if (stage == "train-dnn") result.summary = StageTrainDnn(config, paths);
  else if (stage == "extract-bn") result.summary = StageExtractBn(config, paths);
  else if (stage == "train-ubm") result.summary = StageTrainUbm(config, paths);
  else if (stage == "train-tv") result.summary = StageTrainTv(config, paths);
  else if (stage == "train-plda") result.summary = StageTrainPlda(config, paths);
  else if (stage == "enroll") result.summary = StageEnroll(config, paths);
  else if (stage == "score") result.summary = StageScore(config, paths);
  else if (stage == "evaluate") result.summary = StageEvaluate(config, paths);
  else if (stage == "fuse") result.summary = StageFuse(config, paths);

  // Re-hash inputs (they may have been produced just now, e.g. by synth).
  WriteProvenance(paths, MakeProvenance(stage, config, StageInputs(stage, config, paths)));
  if (!options.quiet) std::cout << "[" << stage << "] " << result.summary << "\n";
  return result;
}

}  // namespace svbn
