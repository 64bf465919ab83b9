// core/wav.cc

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

#include "core/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/common.h"

namespace svbn {

namespace {
struct ChunkHeader {
  char id[4];
  uint32_t size;
};

ChunkHeader ReadChunkHeader(std::istream& is, const std::string& path) {
  ChunkHeader h;
  is.read(h.id, 4);
  if (!is) Throw(Status::kFormat, path + ": truncated RIFF chunk header");
  h.size = io::ReadU32(is, path);
  return h;
}
}  // namespace

AudioClip ReadWav(const std::string& path, const std::string& utterance_id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Throw(Status::kIo, "cannot open wav: " + path);

  char riff[4], wave[4];
  is.read(riff, 4);
  if (!is || std::memcmp(riff, "RIFF", 4) != 0)
    Throw(Status::kFormat, path + ": not a RIFF file");
  io::ReadU32(is, path);  // overall size, unused
  is.read(wave, 4);
  if (!is || std::memcmp(wave, "WAVE", 4) != 0)
    Throw(Status::kFormat, path + ": not a WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  AudioClip clip;
  clip.utterance_id = utterance_id.empty() ? path : utterance_id;

  while (is.peek() != EOF) {
    ChunkHeader chunk = ReadChunkHeader(is, path);
    if (std::memcmp(chunk.id, "fmt ", 4) == 0) {
      if (chunk.size < 16) Throw(Status::kFormat, path + ": fmt chunk too small");
      uint32_t format_channels = io::ReadU32(is, path);
      format = static_cast<uint16_t>(format_channels & 0xffff);
      channels = static_cast<uint16_t>(format_channels >> 16);
      sample_rate = io::ReadU32(is, path);
      io::ReadU32(is, path);  // byte rate
      uint32_t align_bits = io::ReadU32(is, path);
      bits = static_cast<uint16_t>(align_bits >> 16);
      is.ignore(chunk.size - 16);
      have_fmt = true;
    } else if (std::memcmp(chunk.id, "data", 4) == 0) {
      if (!have_fmt) Throw(Status::kFormat, path + ": data chunk before fmt");
      if (format != 1) Throw(Status::kFormat, path + ": only PCM wav supported");
      if (channels != 1) Throw(Status::kFormat, path + ": only mono wav supported");
      if (bits != 16) Throw(Status::kFormat, path + ": only 16-bit wav supported");
      uint32_t n = chunk.size / 2;
      clip.samples.resize(n);
      std::vector<char> raw(chunk.size);
      is.read(raw.data(), chunk.size);
      if (!is) Throw(Status::kFormat, path + ": truncated data chunk");
      for (uint32_t i = 0; i < n; ++i) {
        int16_t s = static_cast<int16_t>(static_cast<uint8_t>(raw[2 * i]) |
                                         (static_cast<uint8_t>(raw[2 * i + 1]) << 8));
        clip.samples[i] = s / 32768.0;
      }
      clip.sample_rate_hz = sample_rate;
      return clip;
    } else {
      is.ignore(chunk.size + (chunk.size & 1));
    }
  }
  Throw(Status::kFormat, path + ": no data chunk");
}

void WriteWav(const std::string& path, const AudioClip& clip) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Throw(Status::kIo, "cannot write wav: " + path);
  uint32_t n = static_cast<uint32_t>(clip.samples.size());
  uint32_t data_size = n * 2;
  os.write("RIFF", 4);
  io::WriteU32(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  io::WriteU32(os, 16);
  io::WriteU32(os, 1u | (1u << 16));               // PCM, mono
  io::WriteU32(os, clip.sample_rate_hz);
  io::WriteU32(os, clip.sample_rate_hz * 2);       // byte rate
  io::WriteU32(os, 2u | (16u << 16));              // block align, bits
  os.write("data", 4);
  io::WriteU32(os, data_size);
  for (uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(clip.samples[i], -1.0, 1.0);
    int16_t s = static_cast<int16_t>(std::lrint(v * 32767.0));
    uint8_t b[2] = {static_cast<uint8_t>(s & 0xff), static_cast<uint8_t>((s >> 8) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 2);
  }
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

}  // namespace svbn
