#include "descfm/nn.hpp"

#include <cmath>

namespace descfm {

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor t(fan_in, fan_out);
  for (double& x : t.values()) x = u(rng);
  round_to_float32(t);
  return t;
}

FeedForward FeedForward::init(std::size_t in, std::size_t hidden, std::size_t hidden_layers, std::size_t out,
                              std::mt19937_64& rng, const std::string& prefix) {
  FeedForward f;
  std::size_t width = in;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const std::size_t next = l == hidden_layers ? out : hidden;
    const std::string tag = prefix + "." + std::to_string(l);
    f.weights.emplace_back(tag + ".weight", xavier_uniform(width, next, rng));
    f.biases.emplace_back(tag + ".bias", Tensor(1, next));
    width = next;
  }
  return f;
}

Var FeedForward::forward(Tape& tape, Var x) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    x = linear(x, tape.param(weights[l]), tape.param(biases[l]));
    if (l + 1 < weights.size()) x = relu(x);
  }
  return x;
}

Var FeedForward::forward_const(Tape& tape, Var x) const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    x = linear(x, tape.borrow(weights[l].value), tape.borrow(biases[l].value));
    if (l + 1 < weights.size()) x = relu(x);
  }
  return x;
}

std::vector<Parameter*> FeedForward::params() {
  std::vector<Parameter*> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

}  // namespace descfm
