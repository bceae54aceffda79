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

#ifndef SFG_SYNTHGEN_CORPUS_IO_HPP_
#define SFG_SYNTHGEN_CORPUS_IO_HPP_

#include <filesystem>
#include <string>

#include "sfg/synthgen/piece.hpp"

namespace sfg::synth {

inline constexpr const char* kCorpusFormat = "sfg-corpus/1";

// Per-piece directory layout:
//   score.pgm        8-bit binary PGM of the strip (255 = ink)
//   spectrogram.f32  text header ("sfg-corpus/1 spectrogram", "bins N",
//                    "frames T", "frame_rate R", "data") followed by
//                    bins*frames little-endian float32 values, bin-major
//   alignment.csv    "frame,x" per spectrogram frame
//   piece.json       id, seed, events, tempo curve, notehead positions
void write_piece_dir(const std::filesystem::path& dir, const PieceBundle& b);
PieceBundle read_piece_dir(const std::filesystem::path& dir);

// Writes corpus.json plus one directory per piece. Refuses to touch a
// non-empty out_dir unless force is set. `meta` is stored verbatim in the
// manifest (generator settings, seed).
void write_corpus(const std::filesystem::path& out_dir, const Corpus& corpus,
                  const std::string& meta_json, bool force);
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace sfg::synth

#endif  // SFG_SYNTHGEN_CORPUS_IO_HPP_
