#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "descfm/tensor.hpp"

namespace descfm {

// Uniform Xavier init, rounded to float32.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

// Stack of `hidden_layers` (Linear + ReLU) blocks followed by a final Linear.
struct FeedForward {
  std::vector<Parameter> weights;
  std::vector<Parameter> biases;

  static FeedForward init(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out,
                          std::mt19937_64& rng, const std::string& prefix = "ffn");

  std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().value.rows(); }
  std::size_t output_dim() const { return weights.empty() ? 0 : weights.back().value.cols(); }

  // Gradients flow into the parameters.
  Var forward(Tape& tape, Var x);
  // Parameters borrowed as constants.
  Var forward_const(Tape& tape, Var x) const;

  std::vector<Parameter*> params();
};

}  // namespace descfm
