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

#include "sfg/synthgen/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "sfg/core/error.hpp"
#include "sfg/core/rng.hpp"

namespace sfg::synth {

namespace {

constexpr int kDiatonicStep[12] = {0, 0, 1, 1, 2, 3, 3, 4, 4, 5, 5, 6};
constexpr double kReferenceDuration = 0.5;

std::string format_id(const std::string& prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return prefix + buf;
}

}  // namespace

double Piece::position_at(double t) const {
  double x = 0.0;
  for (std::size_t i = 0; i < tempo_curve.size(); ++i) {
    const double start = tempo_curve[i].start_time;
    if (t <= start) break;
    const double end = i + 1 < tempo_curve.size()
                           ? std::min(t, tempo_curve[i + 1].start_time)
                           : t;
    x += tempo_curve[i].px_per_second * (end - start);
  }
  return x;
}

void validate_piece(const Piece& piece, int max_voices) {
  if (piece.events.empty()) throw InvalidArgument("piece has no events");
  if (piece.tempo_curve.empty() || piece.tempo_curve.front().start_time != 0.0)
    throw InvalidArgument("tempo curve must start at t=0");
  for (std::size_t i = 0; i < piece.tempo_curve.size(); ++i) {
    const auto& seg = piece.tempo_curve[i];
    if (!(seg.px_per_second > 0.0) || !std::isfinite(seg.px_per_second))
      throw InvalidArgument("tempo curve must be strictly positive");
    if (i > 0 && !(seg.start_time > piece.tempo_curve[i - 1].start_time))
      throw InvalidArgument("tempo segments must have increasing start times");
  }
  double end = 0.0;
  for (std::size_t i = 0; i < piece.events.size(); ++i) {
    const auto& e = piece.events[i];
    if (!(e.onset_time >= 0.0) || !std::isfinite(e.onset_time))
      throw InvalidArgument("negative or non-finite onset time");
    if (!(e.duration > 0.0) || !std::isfinite(e.duration))
      throw InvalidArgument("note durations must be positive");
    if (i > 0) {
      const double prev = piece.events[i - 1].onset_time;
      if (e.onset_time < prev)
        throw InvalidArgument("events must be sorted by onset time");
      if (max_voices == 1 && e.onset_time == prev)
        throw InvalidArgument("monophonic piece has simultaneous onsets");
    }
    end = std::max(end, e.onset_time + e.duration);
  }
  if (piece.total_duration < end - 1e-12)
    throw InvalidArgument("total_duration ends before the last note");
  // Simultaneity sweep: +1 at onsets, -1 at offsets (offsets first on ties).
  std::vector<std::pair<double, int>> marks;
  for (const auto& e : piece.events) {
    marks.emplace_back(e.onset_time, +1);
    marks.emplace_back(e.onset_time + e.duration, -1);
  }
  std::sort(marks.begin(), marks.end());
  int active = 0;
  for (const auto& [t, delta] : marks) {
    active += delta;
    if (active > max_voices)
      throw InvalidArgument("simultaneous voices exceed max_voices");
  }
}

GenSpec gen_preset(const std::string& name) {
  GenSpec spec;
  if (name == "mono") {
    return spec;
  }
  if (name == "poly") {
    spec.n_events = 64;
    spec.tempo_min = 60.0;
    spec.tempo_max = 140.0;
    spec.max_voices = 3;
    spec.chord_prob = 0.5;
    spec.pitch_lo = 30;
    spec.pitch_hi = 66;
    spec.durations = {0.25, 0.5, 1.0};
    spec.tempo_change_prob = 0.15;
    spec.engraving_exponent = 0.6;
    return spec;
  }
  throw InvalidArgument("unknown generator preset '" + name + "'");
}

void validate_gen_spec(const GenSpec& spec) {
  if (spec.n_events < 1) throw InvalidArgument("n_events must be >= 1");
  if (!(spec.tempo_min > 0.0) || !(spec.tempo_max >= spec.tempo_min))
    throw InvalidArgument("tempo_range must be positive and ordered");
  if (spec.max_voices < 1) throw InvalidArgument("max_voices must be >= 1");
  if (spec.pitch_hi <= spec.pitch_lo)
    throw InvalidArgument("pitch range is empty");
  if (spec.pitch_hi - spec.pitch_lo < spec.max_voices)
    throw InvalidArgument("pitch range narrower than max_voices");
  if (spec.durations.empty()) throw InvalidArgument("no durations given");
  for (double d : spec.durations)
    if (!(d > 0.0)) throw InvalidArgument("durations must be positive");
  if (spec.chord_prob < 0.0 || spec.chord_prob > 1.0 ||
      spec.tempo_change_prob < 0.0 || spec.tempo_change_prob > 1.0)
    throw InvalidArgument("probabilities must lie in [0, 1]");
  if (!(spec.engraving_exponent > 0.0))
    throw InvalidArgument("engraving_exponent must be positive");
  if (spec.lead_in < 0.0) throw InvalidArgument("lead_in must be >= 0");
}

Piece generate_piece(std::uint64_t seed, const GenSpec& spec, std::string id) {
  validate_gen_spec(spec);
  Rng rng(seed);
  Piece piece;
  piece.id = id.empty() ? "seed" + std::to_string(seed) : std::move(id);
  piece.seed = seed;

  double base_tempo = rng.uniform(spec.tempo_min, spec.tempo_max);
  const int span = spec.pitch_hi - spec.pitch_lo;
  int melody = spec.pitch_lo + static_cast<int>(rng.uniform_int(span));
  double t = spec.lead_in;
  int group = 0;
  while (static_cast<int>(piece.events.size()) < spec.n_events) {
    const double dur = spec.durations[rng.uniform_int(spec.durations.size())];
    if (group > 0 && rng.uniform() < spec.tempo_change_prob)
      base_tempo = rng.uniform(spec.tempo_min, spec.tempo_max);
    const double tempo =
        base_tempo *
        std::pow(dur / kReferenceDuration, spec.engraving_exponent - 1.0);

    int voices = 1;
    if (spec.max_voices > 1 && rng.uniform() < spec.chord_prob)
      voices = 2 + static_cast<int>(rng.uniform_int(spec.max_voices - 1));
    voices = std::min(voices,
                      spec.n_events - static_cast<int>(piece.events.size()));

    // Melody moves by a bounded random step, reflected at the range ends.
    melody += static_cast<int>(rng.uniform_int(9)) - 4;
    if (melody < spec.pitch_lo) melody = 2 * spec.pitch_lo - melody;
    if (melody >= spec.pitch_hi) melody = 2 * (spec.pitch_hi - 1) - melody;
    melody = std::clamp(melody, spec.pitch_lo, spec.pitch_hi - 1);
    std::vector<int> pitches{melody};
    while (static_cast<int>(pitches.size()) < voices) {
      const int p = spec.pitch_lo + static_cast<int>(rng.uniform_int(span));
      if (std::find(pitches.begin(), pitches.end(), p) == pitches.end())
        pitches.push_back(p);
    }
    std::sort(pitches.begin(), pitches.end());
    for (int p : pitches) piece.events.push_back({t, dur, p});

    if (piece.tempo_curve.empty())
      piece.tempo_curve.push_back({0.0, tempo});
    else if (tempo != piece.tempo_curve.back().px_per_second)
      piece.tempo_curve.push_back({t, tempo});
    t += dur;
    ++group;
  }
  piece.total_duration = t;
  validate_piece(piece, spec.max_voices);
  return piece;
}

int staff_step(int pitch) {
  const int octave = pitch >= 0 ? pitch / 12 : -((11 - pitch) / 12);
  const int pc = pitch - 12 * octave;
  return 7 * octave + kDiatonicStep[pc];
}

double notehead_y(int pitch, const RenderStyle& style) {
  const double center = style.height / 2.0;
  return center -
         (staff_step(pitch) - staff_step(style.reference_pitch)) *
             style.staff_step;
}

ScoreStrip render_score(const Piece& piece, const RenderStyle& style) {
  validate_piece(piece);
  if (style.height < 1 || style.supersample < 1 || !(style.notehead_radius > 0))
    throw InvalidArgument("invalid render style");
  const double ry = style.notehead_radius;
  const double rx = style.notehead_radius * style.notehead_aspect;

  ScoreStrip strip;
  strip.height = style.height;
  strip.notehead_x.reserve(piece.events.size());
  double max_x = 0.0;
  for (const auto& e : piece.events) {
    const double x = piece.position_at(e.onset_time);
    strip.notehead_x.push_back(x);
    max_x = std::max(max_x, x);
  }
  const double needed =
      std::ceil(max_x + rx) + 1.0 + static_cast<double>(style.trailing_width);
  if (needed > style.max_width)
    throw InvalidArgument("score width " + std::to_string(needed) +
                          " px exceeds the width budget of " +
                          std::to_string(style.max_width) + " px");
  strip.width = static_cast<int>(needed);
  strip.pixels.assign(static_cast<std::size_t>(strip.width) * strip.height,
                      0.0f);
  auto px = [&](int r, int c) -> float& {
    return strip.pixels[static_cast<std::size_t>(r) * strip.width + c];
  };

  // Staff lines run from the strip start to just past the last notehead.
  const int staff_end =
      std::min(strip.width - 1, static_cast<int>(std::ceil(max_x + 2.0 * rx)));
  for (int k = -2; k <= 2; ++k) {
    const int row = static_cast<int>(
        std::lround(style.height / 2.0 + 2.0 * k * style.staff_step));
    if (row < 0 || row >= strip.height) continue;
    for (int c = 0; c <= staff_end; ++c)
      px(row, c) = static_cast<float>(style.staff_intensity);
  }

  const int ss = style.supersample;
  for (std::size_t i = 0; i < piece.events.size(); ++i) {
    const double xc = strip.notehead_x[i];
    const double yc = notehead_y(piece.events[i].pitch, style);
    if (yc - ry < 0.0 || yc + ry > strip.height)
      throw InvalidArgument("pitch " + std::to_string(piece.events[i].pitch) +
                            " falls outside the staff raster");
    const int c0 = std::max(0, static_cast<int>(std::floor(xc - rx)));
    const int c1 = std::min(strip.width - 1, static_cast<int>(std::ceil(xc + rx)));
    const int r0 = std::max(0, static_cast<int>(std::floor(yc - ry)));
    const int r1 = std::min(strip.height - 1, static_cast<int>(std::ceil(yc + ry)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        int inside = 0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            // Pixel (r, c) covers [c, c+1) x [r, r+1).
            const double dx = (c + (sx + 0.5) / ss - xc) / rx;
            const double dy = (r + (sy + 0.5) / ss - yc) / ry;
            if (dx * dx + dy * dy <= 1.0) ++inside;
          }
        }
        const float coverage = static_cast<float>(inside) / (ss * ss);
        px(r, c) = std::max(px(r, c), coverage);
      }
    }
  }
  return strip;
}

int onset_frame(double onset_time, double frame_rate) {
  return static_cast<int>(std::lround(onset_time * frame_rate));
}

SpectrogramMatrix render_spectrogram(const Piece& piece,
                                     const AudioProfile& profile) {
  validate_piece(piece);
  if (profile.bins < 1 || !(profile.frame_rate > 0.0) || profile.overtones < 0 ||
      profile.noise_floor < 0.0)
    throw InvalidArgument("invalid audio profile");
  SpectrogramMatrix spec;
  spec.bins = profile.bins;
  spec.frame_rate = profile.frame_rate;
  // The tolerance absorbs representation error in total_duration * rate.
  spec.frames = static_cast<int>(
      std::ceil(piece.total_duration * profile.frame_rate - 1e-9));
  spec.values.assign(static_cast<std::size_t>(spec.bins) * spec.frames, 0.0f);

  for (const auto& e : piece.events) {
    if (e.pitch < 0 || e.pitch >= profile.bins)
      throw InvalidArgument("pitch " + std::to_string(e.pitch) +
                            " outside the " + std::to_string(profile.bins) +
                            "-bin mapping");
    const int f0 = onset_frame(e.onset_time, profile.frame_rate);
    if (f0 >= spec.frames)
      throw InvalidArgument("onset beyond the last spectrogram frame");
    spec.onset_frames.push_back(f0);
    const int len = std::max(
        1, static_cast<int>(std::lround(e.duration * profile.frame_rate)));
    const int f_end = std::min(spec.frames, f0 + len);
    for (int f = f0; f < f_end; ++f) {
      const double envelope =
          std::exp(-profile.decay * static_cast<double>(f - f0) / len);
      double gain = 1.0;
      for (int k = 1; k <= profile.overtones + 1; ++k) {
        const int bin =
            e.pitch + static_cast<int>(std::lround(12.0 * std::log2(k)));
        if (bin < profile.bins) {
          spec.values[static_cast<std::size_t>(bin) * spec.frames + f] +=
              static_cast<float>(gain * envelope);
        }
        gain *= profile.overtone_gain;
      }
    }
  }
  if (profile.noise_floor > 0.0) {
    Rng rng = make_stream(piece.seed, "noise");
    for (auto& v : spec.values)
      v += static_cast<float>(profile.noise_floor * rng.uniform());
  }
  return spec;
}

Alignment interpolate_alignment(const ScoreStrip& score,
                                const SpectrogramMatrix& spec) {
  if (score.notehead_x.size() != spec.onset_frames.size())
    throw InvalidArgument("alignment: notehead count (" +
                          std::to_string(score.notehead_x.size()) +
                          ") differs from onset count (" +
                          std::to_string(spec.onset_frames.size()) + ")");
  if (score.notehead_x.empty())
    throw InvalidArgument("alignment: no onsets");
  // Anchor points, one per distinct onset frame (first occurrence wins).
  std::vector<std::pair<int, double>> anchors;
  for (std::size_t i = 0; i < spec.onset_frames.size(); ++i) {
    const int f = spec.onset_frames[i];
    if (!anchors.empty() && f < anchors.back().first)
      throw InvalidArgument("alignment: onset frames are not sorted");
    if (anchors.empty() || f != anchors.back().first)
      anchors.emplace_back(f, score.notehead_x[i]);
  }
  Alignment a;
  a.x.resize(spec.frames);
  std::size_t k = 0;
  for (int f = 0; f < spec.frames; ++f) {
    if (f <= anchors.front().first) {
      a.x[f] = anchors.front().second;
      continue;
    }
    if (f >= anchors.back().first) {
      a.x[f] = anchors.back().second;
      continue;
    }
    while (anchors[k + 1].first < f) ++k;
    const auto [fa, xa] = anchors[k];
    const auto [fb, xb] = anchors[k + 1];
    a.x[f] = xa + (xb - xa) * static_cast<double>(f - fa) / (fb - fa);
  }
  return a;
}

PieceBundle make_bundle(Piece piece, const RenderStyle& style,
                        const AudioProfile& profile) {
  PieceBundle b;
  b.score = render_score(piece, style);
  b.spectrogram = render_spectrogram(piece, profile);
  b.alignment = interpolate_alignment(b.score, b.spectrogram);
  b.piece = std::move(piece);
  b.onset_flag.assign(b.spectrogram.frames, false);
  for (int f : b.spectrogram.onset_frames) {
    if (!b.onset_flag[f]) b.onset_frames.push_back(f);
    b.onset_flag[f] = true;
  }
  std::sort(b.onset_frames.begin(), b.onset_frames.end());
  return b;
}

Corpus generate_corpus(std::uint64_t base_seed, int n, const GenSpec& spec,
                       const RenderStyle& style, const AudioProfile& profile,
                       const std::string& prefix) {
  Corpus corpus;
  corpus.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = derive_seed(base_seed, "piece", i);
    corpus.push_back(std::make_shared<const PieceBundle>(make_bundle(
        generate_piece(seed, spec, format_id(prefix, i)), style, profile)));
  }
  return corpus;
}

}  // namespace sfg::synth
