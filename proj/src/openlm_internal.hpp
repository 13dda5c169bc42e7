#pragma once

#include <span>
#include <vector>

#include "openxor/openlm.hpp"

namespace openxor::lm::detail {

struct Activations {
  std::vector<double> embed;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;
  double log_norm = 0.0;  // log-sum-exp of logits
};

struct Scratch {
  std::vector<double> d_hidden;
  std::vector<double> d_embed;
};

void forward(const PolicyParams& params, std::span<const double> x, Activations& act);

// Adds d(-log probs[label]) / d(params) into grad.
void backward(const PolicyParams& params, std::span<const double> x, const Activations& act,
              std::size_t label, std::span<double> grad, Scratch& scratch);

}  // namespace openxor::lm::detail
