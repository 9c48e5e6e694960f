#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "vicsim/learning.hpp"
#include "vicsim/policy.hpp"

namespace vicsim {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline nlohmann::json net_to_json(const Mlp& net) {
  nlohmann::json j;
  j["dims"] = net.dims;
  j["leaky_slope"] = net.leaky_slope;
  j["head"] = net.head == Mlp::Head::Sigmoid ? "sigmoid" : "linear";
  std::vector<std::vector<double>> weights, biases;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<double> w;  // row-major
    for (int i = 0; i < net.weights[l].rows(); ++i)
      for (int c = 0; c < net.weights[l].cols(); ++c) w.push_back(net.weights[l](i, c));
    weights.push_back(std::move(w));
    biases.emplace_back(net.biases[l].data(), net.biases[l].data() + net.biases[l].size());
  }
  j["weights"] = weights;
  j["biases"] = biases;
  if (net.has_log_std)
    j["log_std"] = std::vector<double>(net.log_std.data(), net.log_std.data() + net.log_std.size());
  return j;
}

inline Mlp net_from_json(const nlohmann::json& j) {
  Mlp net;
  net.dims = j.at("dims").get<std::vector<int>>();
  net.leaky_slope = j.at("leaky_slope").get<double>();
  net.head = j.at("head").get<std::string>() == "sigmoid" ? Mlp::Head::Sigmoid : Mlp::Head::Linear;
  const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
  const auto biases = j.at("biases").get<std::vector<std::vector<double>>>();
  if (weights.size() + 1 != net.dims.size() || biases.size() != weights.size())
    throw CheckpointError("checkpoint: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const int rows = net.dims[l + 1], cols = net.dims[l];
    if (int(weights[l].size()) != rows * cols || int(biases[l].size()) != rows)
      throw CheckpointError("checkpoint: layer size mismatch");
    MatX w(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int c = 0; c < cols; ++c) w(i, c) = weights[l][size_t(i * cols + c)];
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::Map<const VecX>(biases[l].data(), rows));
  }
  if (j.contains("log_std")) {
    const auto ls = j.at("log_std").get<std::vector<double>>();
    net.has_log_std = true;
    net.log_std = Eigen::Map<const VecX>(ls.data(), long(ls.size()));
  }
  return net;
}

}  // namespace detail

inline void save_checkpoint(const ActorCritic& ac, const std::vector<int>& action_axes,
                            const std::string& path) {
  nlohmann::json j;
  j["format"] = "vicsim-checkpoint";
  j["version"] = kCheckpointVersion;
  j["action_axes"] = action_axes;
  j["actor"] = detail::net_to_json(ac.actor);
  if (!ac.critic.dims.empty()) j["critic"] = detail::net_to_json(ac.critic);
  const VecX norm_mean = ac.norm.mean();
  const VecX norm_std = ac.norm.stddev();
  j["normalization"] = {
      {"mean", std::vector<double>(norm_mean.data(), norm_mean.data() + norm_mean.size())},
      {"std", std::vector<double>(norm_std.data(), norm_std.data() + norm_std.size())},
      {"count", ac.norm.count()}};
  std::ofstream out(path);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline ActorCritic load_checkpoint(const std::string& path, std::vector<int>* action_axes = nullptr) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: corrupt file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || !j.contains("actor"))
    throw CheckpointError("checkpoint: corrupt file: missing fields");
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version " +
                          std::to_string(j.at("version").get<int>()));
  ActorCritic ac;
  ac.actor = detail::net_from_json(j.at("actor"));
  if (j.contains("critic")) ac.critic = detail::net_from_json(j.at("critic"));
  const auto& n = j.at("normalization");
  const auto mean = n.at("mean").get<std::vector<double>>();
  const auto std_ = n.at("std").get<std::vector<double>>();
  ac.norm = Normalizer(int(mean.size()));
  ac.norm.set(Eigen::Map<const VecX>(mean.data(), long(mean.size())),
              Eigen::Map<const VecX>(std_.data(), long(std_.size())),
              n.at("count").get<long>());
  if (action_axes) *action_axes = j.at("action_axes").get<std::vector<int>>();
  return ac;
}

}  // namespace vicsim
