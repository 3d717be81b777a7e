#include "vortex/optim.hpp"

#include <cmath>
#include <sstream>

#include "vortex/error.hpp"

namespace vortex {

void AdamConfig::validate() const {
  VORTEX_REQUIRE(learning_rate > 0.0, "adam: learning rate must be positive");
  VORTEX_REQUIRE(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
                 "adam: betas must lie in [0, 1)");
  VORTEX_REQUIRE(epsilon > 0.0, "adam: epsilon must be positive");
  VORTEX_REQUIRE(weight_decay >= 0.0, "adam: weight decay must be nonnegative");
}

void adam_step(ModelParameters& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
  cfg.validate();
  const std::size_t n = params.size();
  VORTEX_REQUIRE(grads.size() == n, "adam: gradient size mismatch");
  if (state.m.empty() && state.v.empty()) state = AdamState::zeros(n);
  VORTEX_REQUIRE(state.m.size() == n && state.v.size() == n, "adam: state size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(grads[i])) {
      std::ostringstream msg;
      msg << "adam: nonfinite gradient at parameter " << i << " (value " << grads[i]
          << ", step " << state.step + 1 << ")";
      throw NonFiniteError(msg.str());
    }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    double& theta = params.values[i];
    theta -= cfg.learning_rate * cfg.weight_decay * theta;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    theta -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace vortex
