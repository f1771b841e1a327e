#pragma once

// Flow pricing games: integral-flow players route demand through a digraph and
// pay (p - mu_i)^T x_i; an authority picks edge prices p and pays (u - load)^T p.
//
// Encoded variable layout: player i owns [x_{i,e} for e in E, z_i] (all
// integer; z_i = 0 forces the zero flow), the authority owns p (continuous).
//
// Flow document:
//   {"kind": "flow", "num_nodes": 2, "edges": [[0, 1], [0, 1]],
//    "players": [{"source": 0, "sink": 1, "demand": 1, "mu": [3, 1]}],
//    "capacity": [1, 1], "target_load": [0, 1], "price_max": [7, 7]}

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apxne/model.hpp"

namespace apxne::flow {

struct Edge {
  int from;
  int to;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct FlowPlayer {
  int source = 0;
  int sink = 0;
  double demand = 1.0;
  std::vector<double> mu;

  friend bool operator==(const FlowPlayer&, const FlowPlayer&) = default;
};

struct FlowInstance {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<FlowPlayer> players;
  std::vector<double> capacity;
  std::vector<double> target_load;
  std::vector<double> price_max;

  int num_edges() const { return static_cast<int>(edges.size()); }

  friend bool operator==(const FlowInstance&, const FlowInstance&) = default;
};

/// |E| * max mu * max c; every price bound must exceed it.
double price_threshold(const FlowInstance& inst);

/// floor(price_threshold) + 1.
double default_price_max(const FlowInstance& inst);

/// Throws ValidationError for malformed data, InvalidBound for price bounds at or
/// below the threshold.
void validate(const FlowInstance& inst);

Game encode(const FlowInstance& inst);

struct Decoded {
  std::vector<std::vector<double>> flows;  // per player, per edge
  std::vector<double> active;              // z_i
  std::vector<double> prices;
};

Decoded decode(const FlowInstance& inst, std::span<const double> profile);

/// Inverse of decode.
std::vector<double> compose(const FlowInstance& inst, const std::vector<std::vector<double>>& flows,
                            std::span<const double> prices);

struct GenerateParams {
  int nodes = 4;
  int edges = 5;
  int players = 2;
  int demand_min = 1;
  int demand_max = 2;
  int mu_min = 0;
  int mu_max = 5;
  std::uint64_t seed = 1;
  /// Every player starts at the same node.
  bool same_source = false;
  /// Every player shares one utility vector.
  bool identical_mu = false;
};

/// Deterministic in params (including seed). Throws GenerationFailure.
FlowInstance generate(const GenerateParams& params);

struct ImplementationCheck {
  bool load_within_target = false;
  bool equilibrium = false;
  bool slack_edges_free = false;
  bool prices_bounded = false;

  bool all() const { return load_within_target && equilibrium && slack_edges_free && prices_bounded; }
};

/// The four weak-implementation conditions for flows x (per player, per edge)
/// and prices p.
ImplementationCheck check_implementation(const FlowInstance& inst,
                                         const std::vector<std::vector<double>>& flows,
                                         std::span<const double> prices);

FlowInstance parse_flow_instance(const std::string& document);
std::string serialize_flow_instance(const FlowInstance& inst);

}  // namespace apxne::flow
