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

#include "sfg/synthgen/corpus_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sfg/core/error.hpp"

namespace sfg::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw IoError("cannot read " + p.string());
  return is;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_f32_le(std::ostream& os, float v) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(bytes), 4);
}

float read_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

void write_pgm(const fs::path& p, const ScoreStrip& s) {
  auto os = open_out(p);
  os << "P5\n" << s.width << " " << s.height << "\n255\n";
  std::vector<unsigned char> row(s.width);
  for (int r = 0; r < s.height; ++r) {
    for (int c = 0; c < s.width; ++c) {
      const float v = std::clamp(s.at(r, c), 0.0f, 1.0f);
      row[c] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    os.write(reinterpret_cast<const char*>(row.data()), s.width);
  }
}

void read_pgm(const fs::path& p, ScoreStrip& s) {
  auto is = open_in(p);
  std::string magic;
  int maxval = 0;
  is >> magic >> s.width >> s.height >> maxval;
  if (magic != "P5" || maxval != 255 || s.width <= 0 || s.height <= 0)
    throw IoError("malformed PGM " + p.string());
  is.get();  // single whitespace before the raster
  std::vector<unsigned char> raw(static_cast<std::size_t>(s.width) * s.height);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (is.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated PGM " + p.string());
  s.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) s.pixels[i] = raw[i] / 255.0f;
}

void write_spectrogram(const fs::path& p, const SpectrogramMatrix& m) {
  auto os = open_out(p);
  os << kCorpusFormat << " spectrogram\n"
     << "bins " << m.bins << "\n"
     << "frames " << m.frames << "\n"
     << "frame_rate " << fmt_double(m.frame_rate) << "\n"
     << "data\n";
  for (float v : m.values) write_f32_le(os, v);
}

void read_spectrogram(const fs::path& p, SpectrogramMatrix& m) {
  auto is = open_in(p);
  std::string line;
  std::getline(is, line);
  if (line != std::string(kCorpusFormat) + " spectrogram")
    throw IoError("bad spectrogram header in " + p.string());
  m.bins = m.frames = -1;
  m.frame_rate = 0.0;
  while (std::getline(is, line) && line != "data") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "bins") ls >> m.bins;
    else if (key == "frames") ls >> m.frames;
    else if (key == "frame_rate") ls >> m.frame_rate;
    else throw IoError("unknown spectrogram header key '" + key + "'");
  }
  if (line != "data" || m.bins <= 0 || m.frames <= 0 || !(m.frame_rate > 0))
    throw IoError("incomplete spectrogram header in " + p.string());
  const std::size_t n = static_cast<std::size_t>(m.bins) * m.frames;
  std::vector<unsigned char> raw(n * 4);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (is.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("truncated spectrogram data in " + p.string());
  m.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.values[i] = read_f32_le(&raw[4 * i]);
}

json piece_to_json(const PieceBundle& b) {
  json j;
  j["format"] = kCorpusFormat;
  j["id"] = b.piece.id;
  j["seed"] = b.piece.seed;
  j["total_duration"] = b.piece.total_duration;
  json events = json::array();
  for (const auto& e : b.piece.events)
    events.push_back({e.onset_time, e.duration, e.pitch});
  j["events"] = events;
  json tempo = json::array();
  for (const auto& s : b.piece.tempo_curve)
    tempo.push_back({s.start_time, s.px_per_second});
  j["tempo_curve"] = tempo;
  j["notehead_x"] = b.score.notehead_x;
  j["onset_frames"] = b.spectrogram.onset_frames;
  return j;
}

}  // namespace

void write_piece_dir(const fs::path& dir, const PieceBundle& b) {
  fs::create_directories(dir);
  write_pgm(dir / "score.pgm", b.score);
  write_spectrogram(dir / "spectrogram.f32", b.spectrogram);
  {
    auto os = open_out(dir / "alignment.csv");
    os << "frame,x\n";
    for (std::size_t f = 0; f < b.alignment.x.size(); ++f)
      os << f << "," << fmt_double(b.alignment.x[f]) << "\n";
  }
  auto os = open_out(dir / "piece.json");
  os << piece_to_json(b).dump(1) << "\n";
}

PieceBundle read_piece_dir(const fs::path& dir) {
  PieceBundle b;
  json j;
  try {
    auto is = open_in(dir / "piece.json");
    j = json::parse(is);
    if (j.at("format") != kCorpusFormat)
      throw IoError("unsupported corpus format in " + dir.string());
    b.piece.id = j.at("id").get<std::string>();
    b.piece.seed = j.at("seed").get<std::uint64_t>();
    b.piece.total_duration = j.at("total_duration").get<double>();
    for (const auto& e : j.at("events"))
      b.piece.events.push_back(
          {e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<int>()});
    for (const auto& s : j.at("tempo_curve"))
      b.piece.tempo_curve.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    b.score.notehead_x = j.at("notehead_x").get<std::vector<double>>();
    b.spectrogram.onset_frames = j.at("onset_frames").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw IoError("malformed piece.json in " + dir.string() + ": " + e.what());
  }
  read_pgm(dir / "score.pgm", b.score);
  read_spectrogram(dir / "spectrogram.f32", b.spectrogram);
  {
    auto is = open_in(dir / "alignment.csv");
    std::string line;
    std::getline(is, line);
    if (line != "frame,x") throw IoError("bad alignment header in " + dir.string());
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos)
        throw IoError("bad alignment row in " + dir.string());
      const long frame = std::stol(line.substr(0, comma));
      if (frame != static_cast<long>(b.alignment.x.size()))
        throw IoError("alignment frames out of order in " + dir.string());
      b.alignment.x.push_back(std::stod(line.substr(comma + 1)));
    }
  }
  if (static_cast<int>(b.alignment.x.size()) != b.spectrogram.frames ||
      b.score.notehead_x.size() != b.piece.events.size() ||
      b.spectrogram.onset_frames.size() != b.piece.events.size())
    throw IoError("inconsistent piece files in " + dir.string());
  for (int f : b.spectrogram.onset_frames)
    if (f < 0 || f >= b.spectrogram.frames)
      throw IoError("onset frame out of range in " + dir.string());
  b.onset_flag.assign(b.spectrogram.frames, false);
  for (int f : b.spectrogram.onset_frames) {
    if (!b.onset_flag[f]) b.onset_frames.push_back(f);
    b.onset_flag[f] = true;
  }
  std::sort(b.onset_frames.begin(), b.onset_frames.end());
  return b;
}

void write_corpus(const fs::path& out_dir, const Corpus& corpus,
                  const std::string& meta_json, bool force) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!force)
      throw IoError("output directory " + out_dir.string() +
                    " is not empty (use --force to overwrite)");
    fs::remove_all(out_dir);
  }
  fs::create_directories(out_dir);
  json manifest;
  manifest["format"] = kCorpusFormat;
  json ids = json::array();
  for (const auto& b : corpus) ids.push_back(b->piece.id);
  manifest["pieces"] = ids;
  manifest["meta"] = meta_json.empty() ? json::object() : json::parse(meta_json);
  for (const auto& b : corpus) write_piece_dir(out_dir / b->piece.id, *b);
  auto os = open_out(out_dir / "corpus.json");
  os << manifest.dump(1) << "\n";
}

Corpus read_corpus(const fs::path& dir) {
  json manifest;
  try {
    auto is = open_in(dir / "corpus.json");
    manifest = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("malformed corpus.json in " + dir.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kCorpusFormat)
    throw IoError("unsupported corpus format in " + dir.string());
  Corpus corpus;
  for (const auto& id : manifest.at("pieces"))
    corpus.push_back(std::make_shared<const PieceBundle>(
        read_piece_dir(dir / id.get<std::string>())));
  if (corpus.empty()) throw IoError("corpus " + dir.string() + " is empty");
  return corpus;
}

}  // namespace sfg::synth
