// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "omniqa/nn/tensor_io.h"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "omniqa/error.h"

namespace omniqa::nn {
namespace {

static_assert(std::endian::native == std::endian::little,
              "tensor files assume a little-endian host");

constexpr char kMagic[8] = {'O', 'Q', 'T', 'E', 'N', 'S', 'R', '1'};

std::string where(const std::filesystem::path& p) { return p.string() + ": "; }

}  // namespace

bool TensorFile::has(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return true;
  }
  return false;
}

const Tensor& TensorFile::get(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw FormatError("tensor file has no tensor named '" + name + "'");
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file,
                       DType dtype) {
  const std::size_t width = dtype == DType::kF32 ? 4 : 8;
  nlohmann::json index = nlohmann::json::array();
  std::string payload;
  for (const auto& [name, t] : file.tensors) {
    const std::size_t nbytes = t.numel() * width;
    index.push_back({{"name", name},
                     {"dtype", dtype == DType::kF32 ? "f32" : "f64"},
                     {"shape", t.shape()},
                     {"offset", payload.size()},
                     {"nbytes", nbytes}});
    const std::size_t at = payload.size();
    payload.resize(at + nbytes);
    char* dst = payload.data() + at;
    for (double v : t.data()) {
      if (dtype == DType::kF32) {
        const float f = static_cast<float>(v);
        std::memcpy(dst, &f, 4);
      } else {
        std::memcpy(dst, &v, 8);
      }
      dst += width;
    }
  }
  const nlohmann::json header = {{"format", "omniqa-tensors"},
                                 {"version", kTensorFormatVersion},
                                 {"meta", file.meta},
                                 {"tensors", index}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(where(path) + "cannot open for writing");
  const std::uint64_t len = text.size();
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw DataError(where(path) + "write failed");
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(where(path) + "cannot open");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw FormatError(where(path) + "magic: not a tensor file");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 8);
  if (len > bytes.size() - 16) {
    throw FormatError(where(path) + "header_length: " + std::to_string(len) +
                      " exceeds file size");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where(path) + "header: " + e.what());
  }
  if (!header.is_object()) throw FormatError(where(path) + "header: not an object");
  if (header.value("format", std::string()) != "omniqa-tensors") {
    throw FormatError(where(path) + "format: unexpected value");
  }
  if (!header.contains("version") || !header["version"].is_number_integer() ||
      header["version"].get<int>() != kTensorFormatVersion) {
    throw FormatError(where(path) + "version: unsupported");
  }
  if (!header.contains("tensors") || !header["tensors"].is_array()) {
    throw FormatError(where(path) + "tensors: missing index");
  }
  const std::size_t payload_start = 16 + len;
  const std::size_t payload_size = bytes.size() - payload_start;

  TensorFile file;
  if (header.contains("meta")) file.meta = header["meta"];
  std::size_t covered = 0;
  for (const auto& e : header["tensors"]) {
    const std::string name =
        e.contains("name") && e["name"].is_string() ? e["name"].get<std::string>() : "";
    const std::string ctx = where(path) + "tensor '" + name + "' ";
    if (name.empty()) throw FormatError(where(path) + "name: missing in tensor index");
    if (file.has(name)) throw FormatError(ctx + "name: duplicated");
    auto field = [&](const char* key) -> const nlohmann::json& {
      if (!e.contains(key)) throw FormatError(ctx + key + ": missing");
      return e[key];
    };
    const auto& dt = field("dtype");
    std::size_t width = 0;
    if (dt == "f32") {
      width = 4;
    } else if (dt == "f64") {
      width = 8;
    } else {
      throw FormatError(ctx + "dtype: unsupported " + dt.dump());
    }
    const auto& sh = field("shape");
    if (!sh.is_array()) throw FormatError(ctx + "shape: not an array");
    Shape shape;
    std::size_t numel = 1;
    for (const auto& d : sh) {
      if (!d.is_number_integer() || d.get<long long>() < 0 ||
          d.get<long long>() > (1LL << 31)) {
        throw FormatError(ctx + "shape: invalid extent " + d.dump());
      }
      shape.push_back(d.get<int>());
      numel *= static_cast<std::size_t>(shape.back());
    }
    const auto& off = field("offset");
    const auto& nb = field("nbytes");
    if (!off.is_number_unsigned() && !(off.is_number_integer() && off.get<long long>() >= 0)) {
      throw FormatError(ctx + "offset: invalid");
    }
    if (!nb.is_number_unsigned() && !(nb.is_number_integer() && nb.get<long long>() >= 0)) {
      throw FormatError(ctx + "nbytes: invalid");
    }
    const std::size_t offset = off.get<std::size_t>();
    const std::size_t nbytes = nb.get<std::size_t>();
    if (nbytes != numel * width) {
      throw FormatError(ctx + "shape: " + shape_string(shape) + " needs " +
                        std::to_string(numel * width) + " bytes, nbytes says " +
                        std::to_string(nbytes));
    }
    if (offset > payload_size || nbytes > payload_size - offset) {
      throw FormatError(ctx + "offset: data runs past end of file (truncated?)");
    }
    covered = std::max(covered, offset + nbytes);
    std::vector<double> values(numel);
    const char* src = bytes.data() + payload_start + offset;
    for (std::size_t i = 0; i < numel; ++i) {
      if (width == 4) {
        float f;
        std::memcpy(&f, src + 4 * i, 4);
        values[i] = f;
      } else {
        std::memcpy(&values[i], src + 8 * i, 8);
      }
    }
    file.tensors.emplace_back(name, Tensor::from(std::move(shape), std::move(values)));
  }
  if (covered != payload_size) {
    throw FormatError(where(path) + "payload: " + std::to_string(payload_size - covered) +
                      " trailing bytes not described by the index");
  }
  return file;
}

void export_features(const std::filesystem::path& path, const EncodedFeatures& f,
                     DType dtype) {
  validate_features(f, path.string());
  TensorFile file;
  file.meta = {{"kind", "features"}};
  file.tensors.emplace_back("fused", f.fused);
  for (int i = 0; i < 5; ++i) {
    file.tensors.emplace_back("f" + std::to_string(i + 1), f.taps[i]);
  }
  write_tensor_file(path, file, dtype);
}

void validate_features(const EncodedFeatures& f, const std::string& source) {
  const std::string ctx = source + ": ";
  if (!f.fused.defined() || f.fused.rank() != 2 || f.fused.dim(0) < 1) {
    throw FormatError(ctx + "fused: expected [Q, D] tokens");
  }
  const int d = f.fused.dim(1);
  for (int i = 0; i < 5; ++i) {
    const std::string name = "f" + std::to_string(i + 1);
    const Tensor& t = f.taps[i];
    if (!t.defined() || t.rank() != 3) {
      throw FormatError(ctx + name + ": expected [D, H, W] feature grid");
    }
    if (t.dim(0) != d) {
      throw FormatError(ctx + name + ": channel count " + std::to_string(t.dim(0)) +
                        " does not match fused dim " + std::to_string(d));
    }
    if (t.dim(1) != f.taps[0].dim(1) || t.dim(2) != f.taps[0].dim(2)) {
      throw FormatError(ctx + name + ": grid " + shape_string(t.shape()) +
                        " differs from f1 " + shape_string(f.taps[0].shape()));
    }
  }
}

EncodedFeatures import_features(const std::filesystem::path& path) {
  const TensorFile file = read_tensor_file(path);
  EncodedFeatures f;
  auto fetch = [&](const std::string& name) {
    if (!file.has(name)) throw FormatError(where(path) + name + ": missing tensor");
    return file.get(name);
  };
  f.fused = fetch("fused");
  for (int i = 0; i < 5; ++i) f.taps[i] = fetch("f" + std::to_string(i + 1));
  validate_features(f, path.string());
  return f;
}

TensorFile params_to_file(const ParamList& params) {
  TensorFile file;
  for (const auto& p : params) file.tensors.emplace_back(p.name, p.tensor);
  return file;
}

void load_params(const ParamList& params, const TensorFile& file) {
  for (const auto& p : params) {
    const Tensor& src = file.get(p.name);
    if (src.shape() != p.tensor.shape()) {
      throw FormatError("parameter '" + p.name + "' has shape " +
                        shape_string(src.shape()) + ", expected " +
                        shape_string(p.tensor.shape()));
    }
    auto dst = p.tensor.node()->value.begin();
    std::copy(src.data().begin(), src.data().end(), dst);
  }
}

}  // namespace omniqa::nn
