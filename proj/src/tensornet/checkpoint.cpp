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

#include "sfg/tensornet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sfg/core/error.hpp"

namespace sfg::nn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw InvalidArgument("checkpoint has no tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header = ckpt.meta;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.tensors)
    table.push_back({{"name", name}, {"shape", t.shape()}});
  header["tensors"] = table;
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << kCheckpointFormat << '\n' << text.size() << '\n' << text;
    std::vector<double> buf;
    for (const auto& [name, t] : ckpt.tensors) {
      buf.assign(t.values().begin(), t.values().end());
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }
    out.flush();
    if (!out) throw IoError("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::string magic, len_line;
  std::getline(in, magic);
  if (magic != kCheckpointFormat)
    throw IoError(path + " is not an " + std::string(kCheckpointFormat) + " file");
  std::getline(in, len_line);
  std::size_t len = 0;
  try {
    len = std::stoull(len_line);
  } catch (const std::exception&) {
    throw IoError(path + ": malformed header length");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError(path + ": truncated header");
  Checkpoint ckpt;
  try {
    ckpt.meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": bad header: " + e.what());
  }
  const nlohmann::json table = ckpt.meta.value("tensors", nlohmann::json::array());
  ckpt.meta.erase("tensors");
  std::vector<double> buf;
  for (const auto& entry : table) {
    Shape shape = entry.at("shape").get<Shape>();
    buf.resize(shape_size(shape));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw IoError(path + ": truncated tensor data");
    std::vector<Real> data(buf.begin(), buf.end());
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(),
                              Tensor(std::move(shape), std::move(data)));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw IoError(path + ": trailing bytes after tensor data");
  return ckpt;
}

}  // namespace sfg::nn
