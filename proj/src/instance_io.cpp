#include "apxne/instance_io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "apxne/error.hpp"
#include "apxne/flowgame.hpp"

namespace apxne {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const Json& field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) parse_error(where + " is not an object");
  auto it = obj.find(name);
  if (it == obj.end()) parse_error(where + " is missing field '" + name + "'");
  return *it;
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) parse_error(where + " must be a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) parse_error(where + " must be an integer");
  return v.get<int>();
}

std::vector<double> numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) parse_error(where + " must be an array");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
  return out;
}

SparseVec sparse(const Json& v, const std::string& where) {
  if (!v.is_object()) parse_error(where + " must be an object {index: value}");
  SparseVec out;
  for (auto it = v.begin(); it != v.end(); ++it) {
    const std::string& key = it.key();
    int index = 0;
    const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
    if (ec != std::errc() || end != key.data() + key.size() || index < 0) {
      parse_error(where + " has a non-integer index '" + key + "'");
    }
    out.push_back({index, number(it.value(), where + "." + key)});
  }
  return out;
}

Json sparse_json(const SparseVec& v) {
  Json out = Json::object();
  for (const Entry& e : v) out[std::to_string(e.index)] = e.value;
  return out;
}

Game parse_game(const Json& doc) {
  const Mode mode = parse_mode(field(doc, "mode", "instance").get<std::string>());
  const Json& jp = field(doc, "players", "instance");
  if (!jp.is_array()) parse_error("players must be an array");
  std::vector<PlayerBlock> players;
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const std::string where = "players[" + std::to_string(i) + "]";
    PlayerBlock b;
    b.num_int = integer(field(jp[i], "k", where), where + ".k");
    b.num_cont = integer(field(jp[i], "l", where), where + ".l");
    b.lower = numbers(field(jp[i], "lower", where), where + ".lower");
    b.upper = numbers(field(jp[i], "upper", where), where + ".upper");
    players.push_back(std::move(b));
  }
  std::vector<LinearRow> rows;
  if (doc.contains("constraints")) {
    const Json& jc = doc["constraints"];
    if (!jc.is_array()) parse_error("constraints must be an array");
    for (std::size_t r = 0; r < jc.size(); ++r) {
      const std::string where = "constraints[" + std::to_string(r) + "]";
      LinearRow row;
      row.owner = integer(field(jc[r], "owner", where), where + ".owner");
      row.coeffs = sparse(field(jc[r], "coeffs", where), where + ".coeffs");
      row.rhs = number(field(jc[r], "rhs", where), where + ".rhs");
      rows.push_back(std::move(row));
    }
  }
  const Json& jcost = field(doc, "costs", "instance");
  if (!jcost.is_array()) parse_error("costs must be an array");
  std::vector<QuadraticCost> costs(players.size());
  std::vector<bool> seen(players.size(), false);
  for (std::size_t c = 0; c < jcost.size(); ++c) {
    const std::string where = "costs[" + std::to_string(c) + "]";
    const int owner = integer(field(jcost[c], "owner", where), where + ".owner");
    if (owner < 0 || owner >= static_cast<int>(players.size()) || seen[owner]) {
      parse_error(where + " has an invalid or repeated owner");
    }
    seen[owner] = true;
    QuadraticCost& q = costs[owner];
    const Json& j = jcost[c];
    q.constant = j.contains("constant") ? number(j["constant"], where + ".constant") : 0.0;
    if (j.contains("linear")) q.linear = sparse(j["linear"], where + ".linear");
    if (j.contains("quadratic")) {
      const Json& jq = j["quadratic"];
      if (!jq.is_array()) parse_error(where + ".quadratic must be an array");
      for (const Json& t : jq) {
        if (!t.is_array() || t.size() != 3) parse_error(where + ".quadratic entries must be [a, b, coeff]");
        q.quadratic.push_back({integer(t[0], where), integer(t[1], where), number(t[2], where)});
      }
    }
    q.structure = parse_structure(field(j, "structure", where).get<std::string>());
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) parse_error("no cost given for player " + std::to_string(i));
  }
  const bool flag = doc.contains("integrality_flag") && doc["integrality_flag"].get<bool>();
  Game g(mode, std::move(players), std::move(rows), std::move(costs), flag);
  return g;
}

}  // namespace

Game load_instance(const std::string& document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const Json::exception& e) {
    parse_error(std::string("malformed document: ") + e.what());
  }
  if (doc.is_object() && doc.contains("kind") && doc["kind"] == "flow") {
    return flow::encode(flow::parse_flow_instance(document));
  }
  Game g;
  try {
    g = parse_game(doc);
  } catch (const Json::exception& e) {
    parse_error(std::string("malformed field: ") + e.what());
  }
  validate_game(g);
  return g;
}

Game load_instance_file(const std::string& path) { return load_instance(read_file(path)); }

std::string serialize_instance(const Game& game) {
  Json doc;
  doc["mode"] = to_string(game.mode());
  doc["players"] = Json::array();
  for (const PlayerBlock& b : game.players()) {
    doc["players"].push_back({{"k", b.num_int}, {"l", b.num_cont}, {"lower", b.lower}, {"upper", b.upper}});
  }
  doc["constraints"] = Json::array();
  for (const LinearRow& row : game.constraints()) {
    doc["constraints"].push_back({{"owner", row.owner}, {"coeffs", sparse_json(row.coeffs)}, {"rhs", row.rhs}});
  }
  doc["costs"] = Json::array();
  for (int i = 0; i < game.num_players(); ++i) {
    const QuadraticCost& c = game.cost(i);
    Json quad = Json::array();
    for (const QuadTerm& t : c.quadratic) quad.push_back(Json::array({t.a, t.b, t.coeff}));
    doc["costs"].push_back({{"owner", i},
                            {"constant", c.constant},
                            {"linear", sparse_json(c.linear)},
                            {"quadratic", quad},
                            {"structure", to_string(c.structure)}});
  }
  doc["integrality_flag"] = game.integrality_flag();
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

}  // namespace apxne
