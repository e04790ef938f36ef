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

#ifndef OMNIQA_NN_TENSOR_IO_H_
#define OMNIQA_NN_TENSOR_IO_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "omniqa/nn/encoder.h"
#include "omniqa/nn/layers.h"
#include "omniqa/nn/tensor.h"

// Portable tensor file: the 8-byte magic "OQTENSR1", a little-endian uint64
// header length, a JSON header, then the payload. The header holds
// {"format", "version", "meta", "tensors": [{name, dtype, shape, offset,
// nbytes}]} with offsets relative to the payload start. Payload values are
// little-endian IEEE floats ("f32" or "f64").
namespace omniqa::nn {

inline constexpr int kTensorFormatVersion = 1;

enum class DType { kF32, kF64 };

struct TensorFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Tensor>> tensors;

  bool has(const std::string& name) const;
  // Throws FormatError naming the missing tensor.
  const Tensor& get(const std::string& name) const;
};

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file,
                       DType dtype = DType::kF64);
TensorFile read_tensor_file(const std::filesystem::path& path);

// Stores fused tokens as "fused" and taps as "f1".."f5".
void export_features(const std::filesystem::path& path, const EncodedFeatures& f,
                     DType dtype = DType::kF64);
EncodedFeatures import_features(const std::filesystem::path& path);
// Shape checks shared by import and the model heads.
void validate_features(const EncodedFeatures& f, const std::string& source);

TensorFile params_to_file(const ParamList& params);
// Copies values into `params` by name; shapes must match exactly.
void load_params(const ParamList& params, const TensorFile& file);

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_TENSOR_IO_H_
