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

#include "fairmt/encoder.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace fairmt {

Vocab Vocab::FromTokens(const std::vector<std::string>& tokens) {
  Vocab vocab;
  std::set<std::string> distinct(tokens.begin(), tokens.end());
  distinct.erase(kUnkToken);
  for (const auto& t : distinct) {
    vocab.index_[t] = static_cast<int>(vocab.tokens_.size());
    vocab.tokens_.push_back(t);
  }
  return vocab;
}

int Vocab::Id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

std::vector<int> Vocab::Ids(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Id(t));
  return ids;
}

std::int64_t ParamBlocks::Size() const {
  return embedding.size() + projection.size() + projection_bias.size() +
         classifier_weight.size() + classifier_bias.size();
}

Vector ParamBlocks::Flatten() const {
  Vector flat(Size());
  Eigen::Index off = 0;
  auto put = [&](const double* data, Eigen::Index n) {
    std::copy(data, data + n, flat.data() + off);
    off += n;
  };
  put(embedding.data(), embedding.size());
  put(projection.data(), projection.size());
  put(projection_bias.data(), projection_bias.size());
  put(classifier_weight.data(), classifier_weight.size());
  put(classifier_bias.data(), classifier_bias.size());
  return flat;
}

void ParamBlocks::Unflatten(const Vector& flat) {
  if (flat.size() != Size()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  Eigen::Index off = 0;
  auto take = [&](double* data, Eigen::Index n) {
    std::copy(flat.data() + off, flat.data() + off + n, data);
    off += n;
  };
  take(embedding.data(), embedding.size());
  take(projection.data(), projection.size());
  take(projection_bias.data(), projection_bias.size());
  take(classifier_weight.data(), classifier_weight.size());
  take(classifier_bias.data(), classifier_bias.size());
}

ParamBlocks ParamBlocks::ZerosLike() const {
  ParamBlocks z;
  z.embedding = RowMatrix::Zero(embedding.rows(), embedding.cols());
  z.projection = RowMatrix::Zero(projection.rows(), projection.cols());
  z.projection_bias = Vector::Zero(projection_bias.size());
  z.classifier_weight =
      RowMatrix::Zero(classifier_weight.rows(), classifier_weight.cols());
  z.classifier_bias = Vector::Zero(classifier_bias.size());
  return z;
}

bool ParamBlocks::operator==(const ParamBlocks& other) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(embedding, other.embedding) &&
         same(projection, other.projection) &&
         same(projection_bias, other.projection_bias) &&
         same(classifier_weight, other.classifier_weight) &&
         same(classifier_bias, other.classifier_bias);
}

EncoderParams InitParams(const Vocab& vocab, const EncoderDims& dims,
                         std::uint64_t seed) {
  if (vocab.size() <= 1) {
    throw std::invalid_argument("cannot initialize encoder: empty vocabulary");
  }
  if (dims.embed_dim < 1 || dims.hidden_dim < 1 || dims.num_classes < 1) {
    throw std::invalid_argument("encoder dims must be >= 1");
  }
  if (dims.identity && dims.embed_dim != dims.hidden_dim) {
    throw std::invalid_argument("identity mode needs embed_dim == hidden_dim");
  }
  EncoderParams p;
  p.vocab = vocab;
  p.dims = dims;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.1, 0.1);

  auto& b = p.blocks;
  b.embedding.resize(vocab.size(), dims.embed_dim);
  for (Eigen::Index i = 0; i < b.embedding.size(); ++i) {
    b.embedding.data()[i] = uniform(rng);
  }
  if (dims.identity) {
    b.projection = RowMatrix::Identity(dims.hidden_dim, dims.embed_dim);
  } else {
    b.projection.resize(dims.hidden_dim, dims.embed_dim);
    for (Eigen::Index i = 0; i < b.projection.size(); ++i) {
      b.projection.data()[i] = uniform(rng);
    }
  }
  b.projection_bias = Vector::Zero(dims.hidden_dim);
  b.classifier_weight = RowMatrix::Zero(dims.num_classes, dims.hidden_dim);
  b.classifier_bias = Vector::Zero(dims.num_classes);
  return p;
}

namespace {

void PoolRow(std::span<const int> ids, const RowMatrix& embedding,
             double* out) {
  const Eigen::Index e = embedding.cols();
  std::fill(out, out + e, 0.0);
  for (int id : ids) {
    for (Eigen::Index j = 0; j < e; ++j) out[j] += embedding(id, j);
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (Eigen::Index j = 0; j < e; ++j) out[j] *= inv;
}

void ProjectRow(const double* pooled, const EncoderParams& params,
                double* out) {
  const auto& b = params.blocks;
  const int h_dim = params.dims.hidden_dim;
  const int e_dim = params.dims.embed_dim;
  if (params.dims.identity) {
    std::copy(pooled, pooled + e_dim, out);
    return;
  }
  for (int h = 0; h < h_dim; ++h) {
    double z = b.projection_bias[h];
    for (int j = 0; j < e_dim; ++j) z += b.projection(h, j) * pooled[j];
    out[h] = std::tanh(z);
  }
}

}  // namespace

Vector Encode(std::span<const int> token_ids, const EncoderParams& params) {
  if (token_ids.empty()) throw std::invalid_argument("encode: no tokens");
  Vector pooled(params.dims.embed_dim);
  PoolRow(token_ids, params.blocks.embedding, pooled.data());
  Vector v(params.dims.hidden_dim);
  ProjectRow(pooled.data(), params, v.data());
  return v;
}

Vector Encode(const std::vector<std::string>& tokens,
              const EncoderParams& params) {
  const std::vector<int> ids = params.vocab.Ids(tokens);
  return Encode(std::span<const int>(ids), params);
}

EncoderCache EncodeBatch(const std::vector<std::vector<int>>& batch_ids,
                         const EncoderParams& params) {
  const int n = static_cast<int>(batch_ids.size());
  for (const auto& ids : batch_ids) {
    if (ids.empty()) throw std::invalid_argument("encode: no tokens");
  }
  EncoderCache cache;
  cache.pooled.resize(n, params.dims.embed_dim);
  cache.reps.resize(n, params.dims.hidden_dim);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    PoolRow(batch_ids[i], params.blocks.embedding, cache.pooled.row(i).data());
    ProjectRow(cache.pooled.row(i).data(), params, cache.reps.row(i).data());
  }
  return cache;
}

void EncodeBatchBackward(const std::vector<std::vector<int>>& batch_ids,
                         const EncoderParams& params,
                         const EncoderCache& cache, const RowMatrix& dreps,
                         ParamBlocks& grad) {
  const int n = static_cast<int>(batch_ids.size());
  const int e_dim = params.dims.embed_dim;
  const int h_dim = params.dims.hidden_dim;
  RowMatrix dpooled(n, e_dim);
  RowMatrix dz(n, h_dim);

  if (params.dims.identity) {
    dpooled = dreps;
  } else {
    const RowMatrix& w = params.blocks.projection;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < h_dim; ++h) {
        const double v = cache.reps(i, h);
        dz(i, h) = dreps(i, h) * (1.0 - v * v);
      }
      for (int j = 0; j < e_dim; ++j) {
        double acc = 0.0;
        for (int h = 0; h < h_dim; ++h) acc += w(h, j) * dz(i, h);
        dpooled(i, j) = acc;
      }
    }
    // Serial reductions over the batch, in sample order.
    for (int i = 0; i < n; ++i) {
      for (int h = 0; h < h_dim; ++h) {
        grad.projection_bias[h] += dz(i, h);
        for (int j = 0; j < e_dim; ++j) {
          grad.projection(h, j) += dz(i, h) * cache.pooled(i, j);
        }
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const double inv = 1.0 / static_cast<double>(batch_ids[i].size());
    for (int id : batch_ids[i]) {
      for (int j = 0; j < e_dim; ++j) {
        grad.embedding(id, j) += dpooled(i, j) * inv;
      }
    }
  }
}

RowMatrix ClassifierLogits(const RowMatrix& reps, const EncoderParams& params) {
  const auto& b = params.blocks;
  RowMatrix logits = reps * b.classifier_weight.transpose();
  logits.rowwise() += b.classifier_bias.transpose();
  return logits;
}

}  // namespace fairmt
