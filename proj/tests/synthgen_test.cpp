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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfg/core/error.hpp"
#include "sfg/synthgen/corpus_io.hpp"
#include "sfg/synthgen/synthgen.hpp"

using namespace sfg;
using namespace sfg::synth;
namespace fs = std::filesystem;

namespace {

Piece two_note_piece(int pitch_a, int pitch_b, double t_a = 1.0, double t_b = 2.0) {
  Piece p;
  p.id = "hand";
  p.events = {{t_a, 0.5, pitch_a}, {t_b, 0.5, pitch_b}};
  p.tempo_curve = {{0.0, 100.0}};
  p.total_duration = std::max(t_a, t_b) + 0.5;
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("sfg_synthgen_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("generate_piece is deterministic per seed") {
  const GenSpec spec = gen_preset("mono");
  CHECK(generate_piece(7, spec) == generate_piece(7, spec));
  const Piece a = generate_piece(7, spec), b = generate_piece(8, spec);
  CHECK_FALSE(a.events == b.events);
}

TEST_CASE("a single-event piece") {
  GenSpec spec = gen_preset("mono");
  spec.n_events = 1;
  const Piece p = generate_piece(3, spec);
  REQUIRE(p.events.size() == 1);
  CHECK(p.total_duration >= p.events[0].onset_time + p.events[0].duration);
}

TEST_CASE("invalid generator settings are rejected") {
  GenSpec spec = gen_preset("mono");
  spec.durations = {0.5, 0.0};
  CHECK_THROWS_AS(generate_piece(1, spec), InvalidArgument);
  spec = gen_preset("mono");
  spec.n_events = 0;
  CHECK_THROWS_AS(validate_gen_spec(spec), InvalidArgument);
  spec = gen_preset("mono");
  spec.tempo_min = -1;
  CHECK_THROWS_AS(validate_gen_spec(spec), InvalidArgument);
  CHECK_THROWS_AS(gen_preset("jazz"), InvalidArgument);
}

TEST_CASE("generated pieces satisfy the event invariants") {
  for (const char* preset : {"mono", "poly"}) {
    const GenSpec spec = gen_preset(preset);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Piece p = generate_piece(seed, spec);
      CHECK_NOTHROW(validate_piece(p, spec.max_voices));
      CHECK(static_cast<int>(p.events.size()) == spec.n_events);
      for (std::size_t i = 1; i < p.events.size(); ++i) {
        if (spec.max_voices == 1) CHECK(p.events[i].onset_time > p.events[i - 1].onset_time);
        else CHECK(p.events[i].onset_time >= p.events[i - 1].onset_time);
      }
      for (const auto& seg : p.tempo_curve) CHECK(seg.px_per_second > 0);
    }
  }
}

TEST_CASE("noteheads sit at the tempo integral") {
  const ScoreStrip s = render_score(two_note_piece(48, 50), RenderStyle{});
  REQUIRE(s.notehead_x.size() == 2);
  CHECK(s.notehead_x[0] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(s.notehead_x[1] == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("columns past the last notehead are background") {
  RenderStyle style;
  const ScoreStrip s = render_score(two_note_piece(48, 55), style);
  const double margin = 2 * style.notehead_radius * style.notehead_aspect;
  const int first_blank = static_cast<int>(std::ceil(s.notehead_x.back() + margin)) + 1;
  REQUIRE(first_blank < s.width);
  for (int c = first_blank; c < s.width; ++c)
    for (int r = 0; r < s.height; ++r) REQUIRE(s.at(r, c) == 0.0f);
  for (float v : s.pixels) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("an octave spans seven staff steps") {
  RenderStyle style;
  CHECK(staff_step(60) - staff_step(48) == 7);
  CHECK(notehead_y(48, style) - notehead_y(60, style) ==
        doctest::Approx(7 * style.staff_step));
  // The rendered ink follows: the darkest row of each notehead column.
  const ScoreStrip s = render_score(two_note_piece(48, 60), style);
  auto ink_row = [&](double x) {
    const int c = static_cast<int>(std::lround(x));
    int best = 0;
    for (int r = 1; r < s.height; ++r)
      if (s.at(r, c) > s.at(best, c)) best = r;
    return best;
  };
  CHECK(ink_row(s.notehead_x[0]) - ink_row(s.notehead_x[1]) == 28);
}

TEST_CASE("width budget overflow raises") {
  RenderStyle style;
  style.max_width = 150;
  CHECK_THROWS_AS(render_score(two_note_piece(48, 50), style), InvalidArgument);
}

TEST_CASE("onset at one second lands on frame 20") {
  CHECK(onset_frame(1.0, 20.0) == 20);
  const SpectrogramMatrix m = render_spectrogram(two_note_piece(48, 50), AudioProfile{});
  CHECK(m.onset_frames == std::vector<int>{20, 40});
  CHECK(m.frames == static_cast<int>(std::ceil(2.5 * 20)));
}

TEST_CASE("spectrogram is silent before the first onset") {
  const SpectrogramMatrix m = render_spectrogram(two_note_piece(48, 50), AudioProfile{});
  for (int b = 0; b < m.bins; ++b)
    for (int f = 0; f < 20; ++f) REQUIRE(m.at(b, f) == 0.0f);
  double energy = 0;
  for (int b = 0; b < m.bins; ++b) energy += m.at(b, 20);
  CHECK(energy > 0);
}

TEST_CASE("simultaneous events mix additively") {
  AudioProfile prof;
  Piece chord;
  chord.events = {{0.5, 1.0, 40}, {0.5, 1.0, 47}};
  chord.tempo_curve = {{0.0, 80.0}};
  chord.total_duration = 1.5;
  Piece a = chord, b = chord;
  a.events = {chord.events[0]};
  b.events = {chord.events[1]};
  const auto mc = render_spectrogram(chord, prof);
  const auto ma = render_spectrogram(a, prof);
  const auto mb = render_spectrogram(b, prof);
  for (std::size_t i = 0; i < mc.values.size(); ++i)
    REQUIRE(mc.values[i] == ma.values[i] + mb.values[i]);
}

TEST_CASE("pitches outside the bin range are rejected") {
  CHECK_THROWS_AS(render_spectrogram(two_note_piece(48, kNumBins), AudioProfile{}),
                  InvalidArgument);
}

TEST_CASE("noise floor adds bounded non-negative noise") {
  AudioProfile prof;
  prof.noise_floor = 0.05;
  const auto clean = render_spectrogram(two_note_piece(48, 50), AudioProfile{});
  const auto noisy = render_spectrogram(two_note_piece(48, 50), prof);
  for (std::size_t i = 0; i < clean.values.size(); ++i) {
    const float d = noisy.values[i] - clean.values[i];
    REQUIRE((d >= 0.0f && d <= 0.0500001f));
  }
}

TEST_CASE("alignment interpolates between onsets") {
  auto align = [](std::vector<int> frames, std::vector<double> xs, int total) {
    ScoreStrip s;
    s.notehead_x = std::move(xs);
    SpectrogramMatrix m;
    m.frames = total;
    m.onset_frames = std::move(frames);
    return interpolate_alignment(s, m).x;
  };
  CHECK(align({0, 10}, {0, 100}, 12)[5] == 50.0);
  const auto single = align({4}, {37.5}, 9);
  for (double x : single) CHECK(x == 37.5);
  const auto three = align({0, 10, 20}, {0, 100, 400}, 25);
  CHECK(three[15] == 250.0);
  CHECK(three[24] == 400.0);
  CHECK_THROWS_AS(align({0, 10}, {0}, 12), InvalidArgument);
}

TEST_CASE("alignment is monotone and constant tempo round-trips") {
  GenSpec spec = gen_preset("mono");
  const Corpus corpus = generate_corpus(5, 10, spec, {}, {});
  for (const auto& b : corpus) {
    const auto& x = b->alignment.x;
    for (std::size_t f = 1; f < x.size(); ++f) REQUIRE(x[f] >= x[f - 1]);
    REQUIRE(b->piece.tempo_curve.size() == 1);
    const double v = b->piece.tempo_curve[0].px_per_second;
    const int f0 = b->onset_frames.front(), f1 = b->onset_frames.back();
    for (int f = f0; f <= f1; ++f)
      REQUIRE(std::abs(x[f] - x[f0] - v * (f - f0) / kFrameRate) <= 1e-9);
  }
}

TEST_CASE("bundle onset flags mark distinct onset frames") {
  const Corpus corpus = generate_corpus(9, 3, gen_preset("poly"), {}, {});
  for (const auto& b : corpus) {
    int flagged = 0;
    for (bool f : b->onset_flag) flagged += f;
    CHECK(flagged == static_cast<int>(b->onset_frames.size()));
    CHECK(std::is_sorted(b->onset_frames.begin(), b->onset_frames.end()));
    CHECK(b->alignment.x.size() == static_cast<std::size_t>(b->num_frames()));
  }
}

TEST_CASE("corpus round trip and byte-identical regeneration") {
  const Corpus corpus = generate_corpus(21, 3, gen_preset("mono"), {}, {});
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  write_corpus(a, corpus, "{}", false);
  write_corpus(b, generate_corpus(21, 3, gen_preset("mono"), {}, {}), "{}", false);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    REQUIRE(slurp(e.path()) == slurp(b / rel));
  }
  int dirs = 0;
  for (const auto& e : fs::directory_iterator(a))
    if (e.is_directory()) {
      ++dirs;
      for (const char* f : {"score.pgm", "spectrogram.f32", "alignment.csv", "piece.json"})
        CHECK(fs::exists(e.path() / f));
    }
  CHECK(dirs == 3);

  const Corpus back = read_corpus(a);
  REQUIRE(back.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(back[i]->piece == corpus[i]->piece);
    CHECK(back[i]->spectrogram.values == corpus[i]->spectrogram.values);
    CHECK(back[i]->alignment.x == corpus[i]->alignment.x);
    CHECK(back[i]->onset_frames == corpus[i]->onset_frames);
    CHECK(back[i]->score.width == corpus[i]->score.width);
    CHECK(back[i]->score.notehead_x == corpus[i]->score.notehead_x);
  }

  CHECK_THROWS_AS(write_corpus(a, corpus, "{}", false), IoError);
  CHECK_NOTHROW(write_corpus(a, corpus, "{}", true));
  CHECK_THROWS_AS(read_corpus(fresh_dir("none")), IoError);
}
