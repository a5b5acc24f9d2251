// Copyright 2026 The fairmt Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FAIRMT_ENCODER_H_
#define FAIRMT_ENCODER_H_

// Small trainable sentence encoder:
//   v = tanh(projection * mean(embedding[tokens]) + projection_bias)
// followed by a linear softmax classifier over v. In identity mode the
// projection is fixed to I, the bias to 0 and tanh is dropped, so v is the
// mean token embedding.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairmt/kernels.h"

namespace fairmt {

inline constexpr const char* kUnkToken = "<unk>";

// Token -> embedding row. Row 0 is reserved for unknown tokens.
class Vocab {
 public:
  Vocab() : tokens_{kUnkToken} { index_[kUnkToken] = 0; }

  // Builds a vocabulary from the distinct tokens, in sorted order.
  static Vocab FromTokens(const std::vector<std::string>& tokens);

  int Id(const std::string& token) const;
  std::vector<int> Ids(const std::vector<std::string>& tokens) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  int size() const { return static_cast<int>(tokens_.size()); }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

struct EncoderDims {
  int embed_dim = 32;   // E
  int hidden_dim = 32;  // H
  int num_classes = 2;  // K
  bool identity = false;

  bool operator==(const EncoderDims&) const = default;
};

// Trainable tensors. The flat layout used by optimizers and gradient checks
// is: embedding, projection, projection_bias, classifier_weight,
// classifier_bias, each row-major.
struct ParamBlocks {
  RowMatrix embedding;          // V x E
  RowMatrix projection;         // H x E
  Vector projection_bias;       // H
  RowMatrix classifier_weight;  // K x H
  Vector classifier_bias;       // K

  std::int64_t Size() const;
  Vector Flatten() const;
  void Unflatten(const Vector& flat);
  ParamBlocks ZerosLike() const;
  bool operator==(const ParamBlocks& other) const;
};

struct EncoderParams {
  Vocab vocab;
  EncoderDims dims;
  ParamBlocks blocks;

  bool operator==(const EncoderParams&) const = default;
};

// Embedding and projection are drawn uniformly from [-0.1, 0.1] with a
// seeded engine; the classifier starts at zero. Identity mode requires
// embed_dim == hidden_dim. Throws std::invalid_argument on an empty vocab
// (only the reserved row) or non-positive dims.
EncoderParams InitParams(const Vocab& vocab, const EncoderDims& dims,
                         std::uint64_t seed);

Vector Encode(std::span<const int> token_ids, const EncoderParams& params);
Vector Encode(const std::vector<std::string>& tokens,
              const EncoderParams& params);

// Intermediate values of a batch forward pass, kept for the backward pass.
struct EncoderCache {
  RowMatrix pooled;  // N x E
  RowMatrix reps;    // N x H
};

// Encodes every row of `batch_ids` (one row per sample) in parallel.
EncoderCache EncodeBatch(const std::vector<std::vector<int>>& batch_ids,
                         const EncoderParams& params);

// Accumulates the gradient of a scalar loss w.r.t. the encoder tensors given
// d loss / d reps. Classifier blocks of `grad` are left untouched.
void EncodeBatchBackward(const std::vector<std::vector<int>>& batch_ids,
                         const EncoderParams& params,
                         const EncoderCache& cache, const RowMatrix& dreps,
                         ParamBlocks& grad);

// Class logits (N x K) for a batch of representations.
RowMatrix ClassifierLogits(const RowMatrix& reps, const EncoderParams& params);

}  // namespace fairmt

#endif  // FAIRMT_ENCODER_H_
