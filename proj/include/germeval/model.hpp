#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "germeval/dataset.hpp"
#include "germeval/errors.hpp"
#include "germeval/features.hpp"
#include "germeval/rng.hpp"

namespace germeval {

enum class HeadKind : std::uint8_t {
  kSingleLabel = 0,  // two outputs, normalized exponential; bound to one task
  kMultiLabel = 1,   // three outputs, elementwise logistic
};

inline const char* head_name(HeadKind h) {
  return h == HeadKind::kSingleLabel ? "single-label" : "multi-label";
}

/// Hashed-character-n-gram linear classifier. Weights are dense buckets x
/// outputs, row-major by bucket.
struct LinearModel {
  HeadKind head = HeadKind::kMultiLabel;
  Task task = Task::kToxic;  // meaningful for single-label heads only
  FeaturizerConfig featurizer;
  std::vector<double> weights;
  std::vector<double> bias;
  std::uint64_t seed = 0;

  std::size_t num_outputs() const { return head == HeadKind::kSingleLabel ? 2 : 3; }
  std::size_t num_params() const { return weights.size() + bias.size(); }
};

inline LinearModel make_model(HeadKind head, Task task, const FeaturizerConfig& cfg,
                              std::uint64_t seed) {
  LinearModel m;
  m.head = head;
  m.task = task;
  m.featurizer = cfg;
  m.seed = seed;
  const std::size_t outputs = m.num_outputs();
  m.weights.assign(static_cast<std::size_t>(cfg.buckets) * outputs, 0.0);
  m.bias.assign(outputs, 0.0);
  return m;
}

/// Classification-layer initialization: weights uniform in [-1/sqrt(B),
/// 1/sqrt(B)] from the model's own stream, bias zero.
inline void init_weights(LinearModel& m) {
  Rng rng(mix_seed(m.seed, 3));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m.featurizer.buckets));
  for (double& w : m.weights) w = rng.next_double(-scale, scale);
  std::fill(m.bias.begin(), m.bias.end(), 0.0);
}

namespace detail {

inline constexpr double kProbClamp = 1e-12;

inline double clamp_prob(double p) {
  return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

inline std::array<double, kNumTasks> logits(const LinearModel& m, const FeatureVector& x) {
  const std::size_t outputs = m.num_outputs();
  std::array<double, kNumTasks> z = {0.0, 0.0, 0.0};
  for (std::size_t o = 0; o < outputs; ++o) z[o] = m.bias[o];
  for (const auto& [bucket, count] : x.entries) {
    const double c = static_cast<double>(count);
    const double* row = m.weights.data() + static_cast<std::size_t>(bucket) * outputs;
    for (std::size_t o = 0; o < outputs; ++o) z[o] += c * row[o];
  }
  return z;
}

/// Output probabilities. Single-label: {p_negative, p_positive}, summing to 1.
/// Multi-label: per-task logistic probabilities.
inline std::array<double, kNumTasks> predict_one(const LinearModel& m, const FeatureVector& x) {
  std::array<double, kNumTasks> z = logits(m, x);
  if (m.head == HeadKind::kSingleLabel) {
    const double hi = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - hi);
    const double e1 = std::exp(z[1] - hi);
    return {e0 / (e0 + e1), e1 / (e0 + e1), 0.0};
  }
  return {detail::sigmoid(z[0]), detail::sigmoid(z[1]), detail::sigmoid(z[2])};
}

struct Gradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// Mean loss over the batch plus its gradient. Multi-label: binary cross
/// entropy averaged over the three classes; single-label: negative
/// log-likelihood of the bound task's gold class. Probabilities are clamped
/// inside the logs so confident mistakes cannot produce log(0).
inline double loss_and_gradient(const LinearModel& m, const std::vector<const FeatureVector*>& batch,
                                const std::vector<LabelTriple>& gold, Gradient& grad) {
  if (batch.empty()) throw ContractError("loss_and_gradient: empty batch");
  if (batch.size() != gold.size()) {
    throw ContractError("loss_and_gradient: batch and gold sizes differ");
  }
  const std::size_t outputs = m.num_outputs();
  grad.weights.assign(m.weights.size(), 0.0);
  grad.bias.assign(m.bias.size(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const FeatureVector& x = *batch[i];
    const std::array<double, kNumTasks> p = predict_one(m, x);
    std::array<double, kNumTasks> dlogit = {0.0, 0.0, 0.0};
    if (m.head == HeadKind::kSingleLabel) {
      const bool positive = gold[i][static_cast<std::size_t>(m.task)];
      loss -= inv_batch * std::log(detail::clamp_prob(positive ? p[1] : p[0]));
      dlogit[0] = inv_batch * (p[0] - (positive ? 0.0 : 1.0));
      dlogit[1] = inv_batch * (p[1] - (positive ? 1.0 : 0.0));
    } else {
      for (std::size_t t = 0; t < kNumTasks; ++t) {
        const double y = gold[i][t] ? 1.0 : 0.0;
        const double pc = detail::clamp_prob(p[t]);
        loss -= inv_batch / 3.0 * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
        dlogit[t] = inv_batch / 3.0 * (p[t] - y);
      }
    }
    for (const auto& [bucket, count] : x.entries) {
      const double c = static_cast<double>(count);
      double* row = grad.weights.data() + static_cast<std::size_t>(bucket) * outputs;
      for (std::size_t o = 0; o < outputs; ++o) row[o] += c * dlogit[o];
    }
    for (std::size_t o = 0; o < outputs; ++o) grad.bias[o] += dlogit[o];
  }
  return loss;
}

// --- model snapshots -------------------------------------------------------
//
// Little-endian binary format:
//   magic "GEMD", version u32, head u8, task u8, n_min u32, n_max u32,
//   buckets u64, seed u64, outputs u32, bias doubles, weights doubles.

inline constexpr std::uint32_t kModelFormatVersion = 1;

inline void save_model(const LinearModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);
  const auto put = [&](const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  };
  put("GEMD", 4);
  const std::uint32_t version = kModelFormatVersion;
  put(&version, 4);
  const std::uint8_t head = static_cast<std::uint8_t>(m.head);
  const std::uint8_t task = static_cast<std::uint8_t>(m.task);
  put(&head, 1);
  put(&task, 1);
  put(&m.featurizer.n_min, 4);
  put(&m.featurizer.n_max, 4);
  put(&m.featurizer.buckets, 8);
  put(&m.seed, 8);
  const std::uint32_t outputs = static_cast<std::uint32_t>(m.num_outputs());
  put(&outputs, 4);
  put(m.bias.data(), m.bias.size() * sizeof(double));
  put(m.weights.data(), m.weights.size() * sizeof(double));
  if (!out) throw IoError("short write: " + path);
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  const auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw ParseError("truncated model file: " + path);
  };
  char magic[4];
  get(magic, 4);
  if (std::memcmp(magic, "GEMD", 4) != 0) throw ParseError("not a model file: " + path);
  std::uint32_t version = 0;
  get(&version, 4);
  if (version != kModelFormatVersion) {
    throw ParseError(path + ": unsupported model format version " + std::to_string(version));
  }
  LinearModel m;
  std::uint8_t head = 0;
  std::uint8_t task = 0;
  get(&head, 1);
  get(&task, 1);
  if (head > 1 || task >= kNumTasks) throw ParseError(path + ": corrupt model header");
  m.head = static_cast<HeadKind>(head);
  m.task = static_cast<Task>(task);
  get(&m.featurizer.n_min, 4);
  get(&m.featurizer.n_max, 4);
  get(&m.featurizer.buckets, 8);
  get(&m.seed, 8);
  std::uint32_t outputs = 0;
  get(&outputs, 4);
  if (outputs != (m.head == HeadKind::kSingleLabel ? 2u : 3u)) {
    throw ParseError(path + ": output count does not match head type");
  }
  m.bias.resize(outputs);
  get(m.bias.data(), m.bias.size() * sizeof(double));
  m.weights.resize(static_cast<std::size_t>(m.featurizer.buckets) * outputs);
  get(m.weights.data(), m.weights.size() * sizeof(double));
  return m;
}

}  // namespace germeval
