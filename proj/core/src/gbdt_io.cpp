#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <json.hpp>

#include "fedsim/digest.hpp"
#include "fedsim/error.hpp"
#include "fedsim/gbdt.hpp"

namespace fedsim {

namespace {

using nlohmann::json;

[[noreturn]] void bad_model(const std::string& detail) {
  raise(ErrorCode::malformed_model, detail);
}

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) bad_model("model contains a non-finite number");
  if (v == 0.0) v = 0.0;  // canonicalize -0.0, which would not survive a parse round trip
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) bad_model("number formatting failed");
  out.append(buf, ptr);
}

void write_number(std::string& out, std::int64_t v) { out += std::to_string(v); }

// Canonical rendering: compact, keys in lexicographic order, doubles in
// shortest round-trip form. `checksum` is omitted when empty so the digest
// can be computed over the body alone.
std::string render(const GbdtModel& m, const std::string& checksum) {
  std::string out;
  out.reserve(4096);
  out += "{\"base_score\":";
  write_number(out, m.base_score);
  if (!checksum.empty()) {
    out += ",\"checksum\":\"";
    out += checksum;
    out += '"';
  }
  out += ",\"format_version\":";
  write_number(out, static_cast<std::int64_t>(m.format_version));
  out += ",\"learning_rate\":";
  write_number(out, m.learning_rate);
  out += ",\"n_features\":";
  write_number(out, static_cast<std::int64_t>(m.n_features));
  out += ",\"n_train\":";
  write_number(out, m.n_train);
  out += ",\"trees\":[";
  for (std::size_t t = 0; t < m.trees.size(); ++t) {
    if (t) out += ',';
    out += "{\"nodes\":[";
    const auto& nodes = m.trees[t].nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i) out += ',';
      const TreeNode& n = nodes[i];
      if (n.is_leaf()) {
        out += "{\"weight\":";
        write_number(out, n.weight);
        out += '}';
      } else {
        out += "{\"feature\":";
        write_number(out, static_cast<std::int64_t>(n.feature_index));
        out += ",\"left\":";
        write_number(out, static_cast<std::int64_t>(n.left));
        out += ",\"right\":";
        write_number(out, static_cast<std::int64_t>(n.right));
        out += ",\"threshold\":";
        write_number(out, n.threshold);
        out += '}';
      }
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

void expect_keys(const json& obj, std::initializer_list<const char*> keys,
                 const std::string& where) {
  for (const char* k : keys) {
    if (!obj.contains(k)) bad_model(where + " is missing field '" + k + "'");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) bad_model(where + " has unknown field '" + key + "'");
  }
}

double get_finite(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) bad_model(where + " field '" + std::string(key) + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) bad_model(where + " field '" + std::string(key) + "' is not finite");
  return d;
}

std::int64_t get_integer(const json& obj, const char* key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    bad_model(where + " field '" + std::string(key) + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

// Every node reachable from the root exactly once, children in range.
void check_tree_shape(const Tree& tree, std::size_t tree_index) {
  const std::string where = "tree " + std::to_string(tree_index);
  const auto n = static_cast<std::int32_t>(tree.nodes.size());
  std::vector<char> seen(tree.nodes.size(), 0);
  std::vector<std::int32_t> stack = {0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    std::int32_t idx = stack.back();
    stack.pop_back();
    if (idx < 0 || idx >= n) bad_model(where + " has a child index out of range");
    if (seen[static_cast<std::size_t>(idx)]) bad_model(where + " is not a tree (node revisited)");
    seen[static_cast<std::size_t>(idx)] = 1;
    ++visited;
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (!node.is_leaf()) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  if (visited != tree.nodes.size()) bad_model(where + " has unreachable nodes");
}

}  // namespace

std::string serialize(const GbdtModel& model) {
  std::string body = render(model, "");
  return render(model, sha256_hex(body));
}

GbdtModel deserialize(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    bad_model(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad_model("top level must be an object");
  expect_keys(doc, {"base_score", "checksum", "format_version", "learning_rate", "n_features",
                    "n_train", "trees"},
              "model");

  std::int64_t version = get_integer(doc, "format_version", "model");
  if (version != 1) bad_model("unsupported format_version " + std::to_string(version));

  const json& checksum = doc.at("checksum");
  if (!checksum.is_string()) bad_model("checksum must be a string");
  std::string stored = checksum.get<std::string>();
  if (stored.size() != 64 ||
      stored.find_first_not_of("0123456789abcdef") != std::string::npos) {
    bad_model("checksum must be 64 lowercase hex digits");
  }

  GbdtModel m;
  m.format_version = static_cast<int>(version);
  m.base_score = get_finite(doc, "base_score", "model");
  m.learning_rate = get_finite(doc, "learning_rate", "model");
  if (!(m.learning_rate > 0.0) || m.learning_rate > 1.0) {
    bad_model("learning_rate out of range");
  }

  std::int64_t n_features = get_integer(doc, "n_features", "model");
  if (n_features < 1 || n_features > std::numeric_limits<std::int32_t>::max()) {
    bad_model("n_features out of range");
  }
  m.n_features = static_cast<std::int32_t>(n_features);

  m.n_train = get_integer(doc, "n_train", "model");
  if (m.n_train < 0) bad_model("n_train must be >= 0");

  const json& trees = doc.at("trees");
  if (!trees.is_array()) bad_model("trees must be an array");
  m.trees.reserve(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string where = "tree " + std::to_string(t);
    const json& jt = trees[t];
    if (!jt.is_object()) bad_model(where + " must be an object");
    expect_keys(jt, {"nodes"}, where);
    const json& jnodes = jt.at("nodes");
    if (!jnodes.is_array() || jnodes.empty()) bad_model(where + " needs a non-empty node array");
    if (jnodes.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
      bad_model(where + " has too many nodes");
    }

    Tree tree;
    tree.nodes.reserve(jnodes.size());
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
      const std::string node_where = where + " node " + std::to_string(i);
      const json& jn = jnodes[i];
      if (!jn.is_object()) bad_model(node_where + " must be an object");
      TreeNode node;
      if (jn.contains("weight")) {
        expect_keys(jn, {"weight"}, node_where);
        node.weight = get_finite(jn, "weight", node_where);
      } else {
        expect_keys(jn, {"feature", "left", "right", "threshold"}, node_where);
        std::int64_t feature = get_integer(jn, "feature", node_where);
        if (feature < 0 || feature >= n_features) {
          bad_model(node_where + " feature index out of range");
        }
        node.feature_index = static_cast<std::int32_t>(feature);
        node.threshold = get_finite(jn, "threshold", node_where);
        std::int64_t left = get_integer(jn, "left", node_where);
        std::int64_t right = get_integer(jn, "right", node_where);
        if (left < 0 || left >= static_cast<std::int64_t>(jnodes.size()) || right < 0 ||
            right >= static_cast<std::int64_t>(jnodes.size())) {
          bad_model(node_where + " child index out of range");
        }
        node.left = static_cast<std::int32_t>(left);
        node.right = static_cast<std::int32_t>(right);
      }
      tree.nodes.push_back(node);
    }
    check_tree_shape(tree, t);
    m.trees.push_back(std::move(tree));
  }

  // The digest covers the canonical re-rendering, so a mutated value is
  // caught even when the attacker leaves the stored checksum untouched.
  if (sha256_hex(render(m, "")) != stored) bad_model("checksum mismatch");
  return m;
}

}  // namespace fedsim
