// core/vad.h

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

#ifndef SVBN_CORE_VAD_H_
#define SVBN_CORE_VAD_H_

#include <vector>

#include "core/common.h"

namespace svbn {

// Per-utterance adaptive energy threshold. A frame survives iff its
// log-energy is >= floor + aggressiveness * (ceiling - floor), where floor
// and ceiling are taken over the utterance's non-silent frames. Frames with
// exactly zero energy are always dropped, so an all-silent utterance yields
// an empty selection and the mask is invariant to positive gain.
std::vector<bool> EnergyVad(const Vector& frame_energies, double aggressiveness);

}  // namespace svbn

#endif  // SVBN_CORE_VAD_H_
