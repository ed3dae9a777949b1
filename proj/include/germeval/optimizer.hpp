#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "germeval/errors.hpp"

namespace germeval {

enum class LrSchedule : std::uint8_t {
  kWarmupConstant = 0,  // linear warmup to the peak rate, constant after
  kWarmupLinearDecay = 1,
};

/// Learning rate at 1-based update t out of total_updates: linear warmup from
/// 0 to eta over the first warmup_fraction of the run, then constant (or a
/// linear decay to 0 when configured).
inline double learning_rate_at(std::uint64_t t, std::uint64_t total_updates, double eta,
                               double warmup_fraction, LrSchedule schedule) {
  const double warmup = warmup_fraction * static_cast<double>(total_updates);
  if (warmup > 0.0 && static_cast<double>(t) <= warmup) {
    return eta * static_cast<double>(t) / warmup;
  }
  if (schedule == LrSchedule::kWarmupLinearDecay && total_updates > 0) {
    const double remain = static_cast<double>(total_updates) - warmup;
    if (remain <= 0.0) return eta;
    return eta * (static_cast<double>(total_updates - t) / remain);
  }
  return eta;
}

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// First/second moment buffers, one pair per parameter.
struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamWState(std::size_t num_params) : m(num_params, 0.0), v(num_params, 0.0) {}
};

/// One AdamW update: bias-corrected moment step plus decoupled weight decay
/// applied directly to the pre-update parameters, never through the gradient.
/// step_index is 1-based.
inline void adamw_step(std::vector<double>& params, const std::vector<double>& grad,
                       AdamWState& state, double lr, const AdamWConfig& cfg,
                       std::uint64_t step_index) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw ContractError("adamw_step: parameter, gradient and state sizes differ");
  }
  if (step_index < 1) throw ContractError("adamw_step: step_index must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_index));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_index));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw ConfigError("adamw_step: non-finite gradient at parameter " + std::to_string(i) +
                        ", step " + std::to_string(step_index));
    }
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + cfg.weight_decay * params[i]);
  }
}

}  // namespace germeval
