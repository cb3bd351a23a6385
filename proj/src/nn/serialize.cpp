#include "curtail/nn/serialize.hpp"

namespace curtail::nn {

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::identity:
      return "identity";
  }
  return "identity";
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw ShapeError("unknown activation '" + s + "'");
}

nlohmann::json grads_to_json(const GradientSet& g) { return {{"weight", g.weight}, {"bias", g.bias}}; }

GradientSet grads_from_json(const nlohmann::json& j) {
  GradientSet g;
  g.weight = j.at("weight").get<std::vector<std::vector<double>>>();
  g.bias = j.at("bias").get<std::vector<std::vector<double>>>();
  return g;
}

}  // namespace

nlohmann::json to_json(const MlpParams& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : p.layers)
    layers.push_back({{"in", l.in}, {"out", l.out}, {"weight", l.weight}, {"bias", l.bias}});
  return {{"output_activation", activation_name(p.output_activation)}, {"layers", layers}};
}

MlpParams mlp_from_json(const nlohmann::json& j) {
  MlpParams p;
  p.output_activation = parse_activation(j.at("output_activation").get<std::string>());
  for (const auto& jl : j.at("layers")) {
    DenseLayer l;
    l.in = jl.at("in").get<int>();
    l.out = jl.at("out").get<int>();
    l.weight = jl.at("weight").get<std::vector<double>>();
    l.bias = jl.at("bias").get<std::vector<double>>();
    if (l.weight.size() != static_cast<std::size_t>(l.in) * l.out || l.bias.size() != static_cast<std::size_t>(l.out))
      throw ShapeError("checkpoint layer has inconsistent shape");
    if (!p.layers.empty() && p.layers.back().out != l.in) throw ShapeError("checkpoint layers do not chain");
    p.layers.push_back(std::move(l));
  }
  return p;
}

nlohmann::json to_json(const AdamState& s) {
  return {{"learning_rate", s.config.learning_rate},
          {"beta1", s.config.beta1},
          {"beta2", s.config.beta2},
          {"epsilon", s.config.epsilon},
          {"step", s.step},
          {"m", grads_to_json(s.m)},
          {"v", grads_to_json(s.v)}};
}

AdamState adam_from_json(const nlohmann::json& j) {
  AdamState s;
  s.config.learning_rate = j.at("learning_rate").get<double>();
  s.config.beta1 = j.at("beta1").get<double>();
  s.config.beta2 = j.at("beta2").get<double>();
  s.config.epsilon = j.at("epsilon").get<double>();
  s.step = j.at("step").get<std::int64_t>();
  s.m = grads_from_json(j.at("m"));
  s.v = grads_from_json(j.at("v"));
  return s;
}

}  // namespace curtail::nn
