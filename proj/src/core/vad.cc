// core/vad.cc

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

#include "core/vad.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svbn {

std::vector<bool> EnergyVad(const Vector& frame_energies, double aggressiveness) {
  const int t = static_cast<int>(frame_energies.size());
  if (t < 1) Throw(Status::kArg, "energy_vad: need at least one frame");
  if (!(aggressiveness > 0.0 && aggressiveness < 1.0))
    Throw(Status::kConfig, "energy_vad: aggressiveness must be in (0,1)");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < t; ++i) {
    const double e = frame_energies(i);
    if (e < 0.0) Throw(Status::kArg, "energy_vad: negative frame energy");
    if (e == 0.0) continue;
    const double log_e = std::log(e);
    lo = std::min(lo, log_e);
    hi = std::max(hi, log_e);
  }

  std::vector<bool> mask(t, false);
  if (!std::isfinite(lo)) return mask;  // all-silent utterance
  const double threshold = lo + aggressiveness * (hi - lo);
  for (int i = 0; i < t; ++i) {
    const double e = frame_energies(i);
    mask[i] = e > 0.0 && std::log(e) >= threshold;
  }
  return mask;
}

}  // namespace svbn
