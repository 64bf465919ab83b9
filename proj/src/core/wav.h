// core/wav.h

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

#ifndef SVBN_CORE_WAV_H_
#define SVBN_CORE_WAV_H_

#include <string>
#include <vector>

namespace svbn {

/// Raw mono speech signal with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  uint32_t sample_rate_hz = 16000;
  std::string utterance_id;
};

// 16-bit mono PCM only; anything else is a format error.
AudioClip ReadWav(const std::string& path, const std::string& utterance_id = "");
void WriteWav(const std::string& path, const AudioClip& clip);

}  // namespace svbn

#endif  // SVBN_CORE_WAV_H_
