/* Copyright 2026 The Score Following Game Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SFG_SYNTHGEN_PIECE_HPP_
#define SFG_SYNTHGEN_PIECE_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace sfg::synth {

inline constexpr int kNumBins = 78;
inline constexpr double kFrameRate = 20.0;

struct NoteEvent {
  double onset_time = 0.0;  // seconds
  double duration = 0.0;    // seconds
  int pitch = 0;            // semitone index

  bool operator==(const NoteEvent&) const = default;
};

// A tempo segment holds from start_time until the next segment starts.
struct TempoSegment {
  double start_time = 0.0;
  double px_per_second = 0.0;

  bool operator==(const TempoSegment&) const = default;
};

struct Piece {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<NoteEvent> events;
  std::vector<TempoSegment> tempo_curve;  // piecewise constant, starts at 0
  double total_duration = 0.0;

  // Strip position at time t: the integral of the tempo curve over [0, t].
  double position_at(double t) const;

  bool operator==(const Piece&) const = default;
};

// Throws InvalidArgument on a violated Piece/NoteEvent invariant.
// max_voices bounds the number of simultaneously sounding events.
void validate_piece(const Piece& piece, int max_voices = 1 << 20);

// 2-D grayscale raster, row-major, values in [0, 1] (0 = background).
struct ScoreStrip {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;
  std::vector<double> notehead_x;  // one per event, in event order

  float at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * width + col];
  }
};

// bins x frames, row-major by bin. Values are non-negative.
struct SpectrogramMatrix {
  int bins = kNumBins;
  int frames = 0;
  double frame_rate = kFrameRate;
  std::vector<float> values;
  std::vector<int> onset_frames;  // one per event, in event order

  float at(int bin, int frame) const {
    return values[static_cast<std::size_t>(bin) * frames + frame];
  }
};

// Ground-truth strip position for every spectrogram frame.
struct Alignment {
  std::vector<double> x;
};

// Everything the environment needs about one piece.
struct PieceBundle {
  Piece piece;
  ScoreStrip score;
  SpectrogramMatrix spectrogram;
  Alignment alignment;
  // Distinct onset frames, ascending; onset_flag[f] marks them per frame.
  std::vector<int> onset_frames;
  std::vector<bool> onset_flag;

  int num_frames() const { return spectrogram.frames; }
};

using BundlePtr = std::shared_ptr<const PieceBundle>;
using Corpus = std::vector<BundlePtr>;

}  // namespace sfg::synth

#endif  // SFG_SYNTHGEN_PIECE_HPP_
