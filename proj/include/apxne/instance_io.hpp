#pragma once

// Instance documents (JSON).
//
//   {"mode": "NEP" | "GNEP",
//    "players": [{"k": 1, "l": 0, "lower": [0], "upper": [1]}, ...],
//    "constraints": [{"owner": 0, "coeffs": {"0": 1.0}, "rhs": 1.0}, ...],
//    "costs": [{"owner": 0, "constant": 0, "linear": {"0": 1}, "quadratic": [[0, 1, 2.0]],
//               "structure": "ConvexInAll"}, ...],
//    "integrality_flag": true}
//
// Variable indices are 0-based positions in the global order. A document with
// "kind": "flow" is a flow-game instance and is encoded on load.

#include <string>

#include "apxne/model.hpp"

namespace apxne {

/// Parses and validates. Throws ParseError / ValidationError.
Game load_instance(const std::string& document);

Game load_instance_file(const std::string& path);

/// Inverse of load_instance (round-trips every coefficient exactly).
std::string serialize_instance(const Game& game);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace apxne
