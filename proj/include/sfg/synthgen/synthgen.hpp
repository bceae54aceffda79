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

#ifndef SFG_SYNTHGEN_SYNTHGEN_HPP_
#define SFG_SYNTHGEN_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sfg/synthgen/piece.hpp"

namespace sfg::synth {

// Parameters of the procedural piece generator. Onsets advance by durations
// drawn from `durations`; dyadic multiples of 1/20 s keep every onset exactly
// on the spectrogram frame grid.
struct GenSpec {
  int n_events = 32;
  double tempo_min = 60.0;  // px/s
  double tempo_max = 100.0;
  int max_voices = 1;
  double chord_prob = 0.0;  // probability that an onset carries a chord
  int pitch_lo = 36;        // inclusive
  int pitch_hi = 60;        // exclusive
  std::vector<double> durations{0.25, 0.5, 1.0};  // seconds
  // Probability that the base tempo is redrawn at an onset.
  double tempo_change_prob = 0.0;
  // Notehead spacing grows like duration^exponent; 1 gives spacing exactly
  // proportional to time, smaller values mimic engraved (compressed) spacing.
  double engraving_exponent = 1.0;
  double lead_in = 0.5;  // seconds of silence before the first onset

  bool operator==(const GenSpec&) const = default;
};

struct RenderStyle {
  int height = 160;
  double notehead_radius = 4.0;  // vertical semi-axis, px
  double notehead_aspect = 1.3;  // horizontal / vertical semi-axis
  double staff_step = 4.0;       // px per diatonic step (half line spacing)
  int reference_pitch = 48;      // pitch drawn on the middle staff line
  double staff_intensity = 0.35;
  int trailing_width = 512;      // background appended after the last note
  int max_width = 1 << 20;       // width budget; overflow is an error
  int supersample = 4;

  bool operator==(const RenderStyle&) const = default;
};

struct AudioProfile {
  int bins = kNumBins;
  double frame_rate = kFrameRate;
  int overtones = 3;          // harmonics above the fundamental
  double overtone_gain = 0.5; // amplitude ratio between successive partials
  double decay = 3.0;         // exp(-decay * elapsed / duration)
  double noise_floor = 0.0;   // eta; uniform noise in [0, eta)

  bool operator==(const AudioProfile&) const = default;
};

// Shipped configurations: "mono" (folk-melody analog) and "poly"
// (piano-literature analog). Throws InvalidArgument on an unknown name.
GenSpec gen_preset(const std::string& name);

void validate_gen_spec(const GenSpec& spec);

Piece generate_piece(std::uint64_t seed, const GenSpec& spec,
                     std::string id = {});

ScoreStrip render_score(const Piece& piece, const RenderStyle& style);

SpectrogramMatrix render_spectrogram(const Piece& piece,
                                     const AudioProfile& profile);

Alignment interpolate_alignment(const ScoreStrip& score,
                                const SpectrogramMatrix& spec);

// Diatonic staff step of a pitch (C-major raster; accidentals share the
// step of the natural below). One octave is 7 steps.
int staff_step(int pitch);

// Vertical pixel center of a notehead for `pitch` under `style`.
double notehead_y(int pitch, const RenderStyle& style);

int onset_frame(double onset_time, double frame_rate);

PieceBundle make_bundle(Piece piece, const RenderStyle& style,
                        const AudioProfile& profile);

// n pieces with ids "<prefix>000", ... and seeds derived from base_seed.
Corpus generate_corpus(std::uint64_t base_seed, int n, const GenSpec& spec,
                       const RenderStyle& style, const AudioProfile& profile,
                       const std::string& prefix = "piece");

}  // namespace sfg::synth

#endif  // SFG_SYNTHGEN_SYNTHGEN_HPP_
