// core/model_io.h

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

#ifndef SVBN_CORE_MODEL_IO_H_
#define SVBN_CORE_MODEL_IO_H_

#include <string>

#include "core/dense_net.h"
#include "core/gmm.h"
#include "core/gru.h"
#include "core/ivector.h"
#include "core/losses.h"
#include "core/pca.h"
#include "core/plda.h"

namespace svbn {

/// A trained feature-extraction network plus its loss head.
struct NetworkModel {
  enum class Type : uint8_t { kDense = 0, kGru = 1 };
  Type type = Type::kDense;
  DenseNetwork dense;
  GruEncoder gru;
  LossHead head;
};

// All binary formats are little-endian with 64-bit parameters; loaders throw
// kFormat with a byte offset on truncation or bad magic, leaving no partial
// model behind.
void SaveNetworkModel(const std::string& path, const NetworkModel& model);   // "BNM1"
NetworkModel LoadNetworkModel(const std::string& path);

void SavePcaModel(const std::string& path, const PcaModel& model);           // "BNP1"
PcaModel LoadPcaModel(const std::string& path);

void SaveGmm(const std::string& path, const DiagGmm& gmm);                   // "BNG1"
DiagGmm LoadGmm(const std::string& path);

void SaveTvModel(const std::string& path, const TvModel& tv);                // "BNT1"
TvModel LoadTvModel(const std::string& path);

void SavePldaModel(const std::string& path, const PldaModel& plda);          // "BNPL"
PldaModel LoadPldaModel(const std::string& path);

}  // namespace svbn

#endif  // SVBN_CORE_MODEL_IO_H_
