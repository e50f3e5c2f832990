#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bnsl/error.hpp"
#include "bnsl/network.hpp"

namespace bnsl {

// Network files are JSON documents:
//   {
//     "variables": [{"name": ..., "values": [...]}, ...],
//     "nodes": [{"name": ..., "parents": [names...], "cpt": {...}}, ...]
//   }
// with cpt one of
//   {"type": "table",   "rows": [{"config": [value names], "dist": [...]}]}
//   {"type": "default", "rows": [...], "default_dist": [...]}
//   {"type": "tree",    "root": {"leaf": [...]}
//                        or {"test": parent name, "children": {value: node}}}
// Table rows cover every configuration exactly once; config values appear in
// the node's parent order. Distributions are finite nonnegative decimals; a
// vector whose sum strays from 1 by more than 1e-6 is rejected, anything
// closer is renormalized.

namespace detail {

inline ParseError json_parse_error(const std::string& path,
                                   const std::string& text,
                                   const nlohmann::json::parse_error& e) {
  std::size_t line = 1;
  const std::size_t limit = std::min(text.size(), e.byte);
  for (std::size_t i = 0; i < limit; ++i)
    if (text[i] == '\n') ++line;
  return ParseError(path + ":" + std::to_string(line) + ": " + e.what());
}

inline std::vector<double> parse_dist(const nlohmann::json& j, int card,
                                      const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != card)
    throw ValidationError(where + ": distribution needs " +
                          std::to_string(card) + " entries");
  std::vector<double> dist;
  dist.reserve(card);
  double sum = 0.0;
  for (const auto& v : j) {
    if (!v.is_number())
      throw ValidationError(where + ": distribution entries must be numbers");
    const double p = v.get<double>();
    if (!std::isfinite(p) || p < 0.0)
      throw ValidationError(where +
                            ": probabilities must be finite and nonnegative");
    dist.push_back(p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ValidationError(where + ": distribution sums to " +
                          std::to_string(sum) + ", not 1");
  for (double& p : dist) p /= sum;
  return dist;
}

inline std::vector<std::uint8_t> parse_config(
    const nlohmann::json& j, const VariableTable& vars,
    const std::vector<int>& parents, const std::string& where) {
  if (!j.is_array() || j.size() != parents.size())
    throw ValidationError(where + ": config must assign every parent");
  std::vector<std::uint8_t> config(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    if (!j[i].is_string())
      throw ValidationError(where + ": config entries are value names");
    const int val = vars.value_index(parents[i], j[i].get<std::string>());
    if (val < 0)
      throw ValidationError(where + ": unknown value '" +
                            j[i].get<std::string>() + "' for variable " +
                            vars.name(parents[i]));
    config[i] = static_cast<std::uint8_t>(val);
  }
  return config;
}

// Parses a tree node; collects leaf distributions in preorder.
inline TreeNode parse_tree_node(const nlohmann::json& j,
                                const VariableTable& vars,
                                const std::vector<int>& parents, int card,
                                std::vector<std::vector<double>>& leaf_dists,
                                const std::string& where) {
  if (!j.is_object())
    throw ValidationError(where + ": tree node must be an object");
  if (j.contains("leaf")) {
    leaf_dists.push_back(parse_dist(j.at("leaf"), card, where));
    return TreeNode{};
  }
  if (!j.contains("test") || !j.contains("children"))
    throw ValidationError(where + ": tree node needs leaf or test+children");
  const std::string test_name = j.at("test").get<std::string>();
  int slot = -1;
  for (std::size_t i = 0; i < parents.size(); ++i)
    if (vars.name(parents[i]) == test_name) slot = static_cast<int>(i);
  if (slot < 0)
    throw ValidationError(where + ": tested variable '" + test_name +
                          "' is not a parent");
  const auto& children = j.at("children");
  if (!children.is_object())
    throw ValidationError(where + ": children must map value names to nodes");
  const int test_card = vars.cardinality(parents[slot]);
  if (static_cast<int>(children.size()) != test_card)
    throw ValidationError(where + ": need one child per value of " +
                          test_name);
  TreeNode node;
  node.test_slot = slot;
  for (int v = 0; v < test_card; ++v) {
    const std::string& value = vars.value_name(parents[slot], v);
    if (!children.contains(value))
      throw ValidationError(where + ": missing child for " + test_name + "=" +
                            value);
    node.children.push_back(parse_tree_node(children.at(value), vars, parents,
                                            card, leaf_dists, where));
  }
  return node;
}

}  // namespace detail

inline BayesianNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw detail::json_parse_error(path, text, e);
  }
  if (!doc.is_object() || !doc.contains("variables") ||
      !doc.contains("nodes"))
    throw ValidationError(path + ": document needs variables and nodes");

  std::vector<VariableTable::Variable> vars_raw;
  for (const auto& jv : doc.at("variables")) {
    VariableTable::Variable v;
    v.name = jv.at("name").get<std::string>();
    for (const auto& val : jv.at("values"))
      v.values.push_back(val.get<std::string>());
    vars_raw.push_back(std::move(v));
  }
  const VariableTable vars(std::move(vars_raw));

  std::vector<std::vector<int>> parent_lists(vars.size());
  std::vector<const nlohmann::json*> node_json(vars.size(), nullptr);
  for (const auto& jn : doc.at("nodes")) {
    const std::string name = jn.at("name").get<std::string>();
    const int v = vars.index_of(name);
    if (v < 0)
      throw ValidationError(path + ": node '" + name +
                            "' is not a declared variable");
    if (node_json[v])
      throw ValidationError(path + ": node '" + name + "' appears twice");
    node_json[v] = &jn;
    for (const auto& jp : jn.at("parents")) {
      const int p = vars.index_of(jp.get<std::string>());
      if (p < 0)
        throw ValidationError(path + ": node '" + name +
                              "' lists unknown parent '" +
                              jp.get<std::string>() + "'");
      parent_lists[v].push_back(p);
    }
  }
  for (int v = 0; v < vars.size(); ++v)
    if (!node_json[v])
      throw ValidationError(path + ": no node entry for variable " +
                            vars.name(v));

  BayesianNetwork net;
  net.vars = vars;
  net.dag = Dag::from_parent_lists(parent_lists);

  for (int v = 0; v < vars.size(); ++v) {
    const auto& jn = *node_json[v];
    const auto& parents = net.dag.parents(v);
    const int card = vars.cardinality(v);
    const std::string where = path + ": node " + vars.name(v);
    const auto& cpt = jn.at("cpt");
    const std::string type = cpt.at("type").get<std::string>();
    CptParams params(card);

    if (type == "table") {
      const std::uint64_t m = parent_config_count_checked(vars, parents);
      if (m > (std::uint64_t(1) << 20))
        throw StateSpaceTooLargeError(where + ": table too large");
      const auto& rows = cpt.at("rows");
      if (rows.size() != m)
        throw ValidationError(where + ": table needs " + std::to_string(m) +
                              " rows, has " + std::to_string(rows.size()));
      std::vector<char> seen(m, 0);
      for (const auto& jr : rows) {
        const auto config =
            detail::parse_config(jr.at("config"), vars, parents, where);
        const std::uint64_t rank = config_rank(vars, parents, config);
        if (seen[rank])
          throw ValidationError(where + ": duplicate table row");
        seen[rank] = 1;
        params.set(rank, detail::parse_dist(jr.at("dist"), card, where));
      }
      net.locals.emplace_back(FullTable{});
    } else if (type == "default") {
      DefaultTable dt;
      std::uint64_t pid = 0;
      for (const auto& jr : cpt.at("rows")) {
        dt.rows.push_back(
            detail::parse_config(jr.at("config"), vars, parents, where));
        params.set(pid++, detail::parse_dist(jr.at("dist"), card, where));
      }
      params.set(pid, detail::parse_dist(cpt.at("default_dist"), card, where));
      net.locals.emplace_back(std::move(dt));
    } else if (type == "tree") {
      std::vector<std::vector<double>> leaf_dists;
      DecisionTree tree;
      tree.root = detail::parse_tree_node(cpt.at("root"), vars, parents, card,
                                          leaf_dists, where);
      for (std::size_t i = 0; i < leaf_dists.size(); ++i)
        params.set(i, std::move(leaf_dists[i]));
      net.locals.emplace_back(std::move(tree));
    } else {
      throw ValidationError(where + ": unknown cpt type '" + type + "'");
    }
    net.params.push_back(std::move(params));
  }

  validate_network(net);
  return net;
}

namespace detail {

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Probabilities round-trip exactly through %.17g.
inline std::string fmt_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

inline void write_dist(std::ostream& os, const std::vector<double>& dist) {
  os << '[';
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (i) os << ", ";
    os << fmt_prob(dist[i]);
  }
  os << ']';
}

inline void write_config(std::ostream& os, const VariableTable& vars,
                         const std::vector<int>& parents,
                         const std::vector<std::uint8_t>& config) {
  os << '[';
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (i) os << ", ";
    os << '"' << json_escape(vars.value_name(parents[i], config[i])) << '"';
  }
  os << ']';
}

inline void write_tree_node(std::ostream& os, const BayesianNetwork& net,
                            int v, const TreeNode& node,
                            std::uint64_t& next_leaf,
                            const std::string& indent) {
  const auto& parents = net.dag.parents(v);
  if (node.is_leaf()) {
    os << "{\"leaf\": ";
    write_dist(os, net.params[v].dist(next_leaf++));
    os << '}';
    return;
  }
  const int parent = parents[node.test_slot];
  os << "{\n" << indent << "  \"test\": \""
     << json_escape(net.vars.name(parent)) << "\",\n"
     << indent << "  \"children\": {";
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    if (c) os << ',';
    os << '\n' << indent << "    \""
       << json_escape(net.vars.value_name(parent, static_cast<int>(c)))
       << "\": ";
    write_tree_node(os, net, v, node.children[c], next_leaf, indent + "    ");
  }
  os << '\n' << indent << "  }\n" << indent << '}';
}

}  // namespace detail

inline void save_network(const BayesianNetwork& net, const std::string& path) {
  validate_network(net);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("cannot open " + path + " for writing");

  os << "{\n  \"variables\": [\n";
  for (int v = 0; v < net.vars.size(); ++v) {
    os << "    {\"name\": \"" << detail::json_escape(net.vars.name(v))
       << "\", \"values\": [";
    for (int x = 0; x < net.vars.cardinality(v); ++x) {
      if (x) os << ", ";
      os << '"' << detail::json_escape(net.vars.value_name(v, x)) << '"';
    }
    os << "]}" << (v + 1 < net.vars.size() ? "," : "") << '\n';
  }
  os << "  ],\n  \"nodes\": [\n";

  for (int v = 0; v < net.vars.size(); ++v) {
    const auto& parents = net.dag.parents(v);
    os << "    {\n      \"name\": \"" << detail::json_escape(net.vars.name(v))
       << "\",\n      \"parents\": [";
    for (std::size_t i = 0; i < parents.size(); ++i) {
      if (i) os << ", ";
      os << '"' << detail::json_escape(net.vars.name(parents[i])) << '"';
    }
    os << "],\n      \"cpt\": ";

    if (std::holds_alternative<FullTable>(net.locals[v])) {
      const std::uint64_t m = parent_config_count_checked(net.vars, parents);
      if (m > (std::uint64_t(1) << 20))
        throw StateSpaceTooLargeError("table too large to serialize: " +
                                      net.vars.name(v));
      os << "{\"type\": \"table\", \"rows\": [";
      for (std::uint64_t rank = 0; rank < m; ++rank) {
        if (rank) os << ',';
        os << "\n        {\"config\": ";
        detail::write_config(os, net.vars, parents,
                             config_from_rank(net.vars, parents, rank));
        os << ", \"dist\": ";
        detail::write_dist(os, net.params[v].dist(rank));
        os << '}';
      }
      os << "\n      ]}";
    } else if (const auto* dt = std::get_if<DefaultTable>(&net.locals[v])) {
      os << "{\"type\": \"default\", \"rows\": [";
      for (std::size_t i = 0; i < dt->rows.size(); ++i) {
        if (i) os << ',';
        os << "\n        {\"config\": ";
        detail::write_config(os, net.vars, parents, dt->rows[i]);
        os << ", \"dist\": ";
        detail::write_dist(os, net.params[v].dist(i));
        os << '}';
      }
      os << "\n      ], \"default_dist\": ";
      detail::write_dist(os, net.params[v].dist(dt->rows.size()));
      os << '}';
    } else {
      const auto& tree = std::get<DecisionTree>(net.locals[v]);
      os << "{\"type\": \"tree\", \"root\": ";
      std::uint64_t next_leaf = 0;
      detail::write_tree_node(os, net, v, tree.root, next_leaf, "      ");
      os << '}';
    }
    os << "\n    }" << (v + 1 < net.vars.size() ? "," : "") << '\n';
  }
  os << "  ]\n}\n";
  if (!os) throw ParseError("write failed: " + path);
}

// Accepts either a full network file or a bare {"variables": [...]} schema.
inline VariableTable load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw detail::json_parse_error(path, text, e);
  }
  if (!doc.is_object() || !doc.contains("variables"))
    throw ValidationError(path + ": document needs variables");
  if (doc.contains("nodes")) return load_network(path).vars;
  std::vector<VariableTable::Variable> vars_raw;
  for (const auto& jv : doc.at("variables")) {
    VariableTable::Variable v;
    v.name = jv.at("name").get<std::string>();
    for (const auto& val : jv.at("values"))
      v.values.push_back(val.get<std::string>());
    vars_raw.push_back(std::move(v));
  }
  return VariableTable(std::move(vars_raw));
}

}  // namespace bnsl
