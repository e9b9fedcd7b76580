#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rcx {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L2 penalty folded into the gradient (coupled decay).
  double weight_decay = 0.0;
};

class Adam {
 public:
  Adam(AdamConfig config, std::size_t num_parameters);

  void step(std::span<double> params, std::span<const double> grads);
  std::size_t steps_taken() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace rcx
