// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/cmem.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ch2o {

using json = nlohmann::ordered_json;

// Version of the dump layout below, documented in the README.
inline constexpr int dump_schema_version = 1;

// Bits render as one character each (or p:<id>:<i> for pointer fragments,
// separated by spaces); permissions render as runs [perm, count].
inline json render_pbits(const std::vector<pbit> &xs) {
  std::string bits;
  bool spaced = false;
  for (const auto &x : xs)
    spaced = spaced || x.tag.k == bit::kind::frag;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (spaced && i != 0)
      bits += ' ';
    bits += to_string(xs[i].tag);
  }
  json runs = json::array();
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j].value == xs[i].value)
      ++j;
    runs.push_back(json::array({to_string(xs[i].value), j - i}));
    i = j;
  }
  return json{{"bits", bits}, {"perms", runs}};
}

inline json render_tree(const mtree &w) {
  switch (w.k) {
  case mtree::kind::base: {
    json j{{"node", "base"}, {"type", to_string(w.bt)}};
    j.update(render_pbits(w.bits));
    return j;
  }
  case mtree::kind::array: {
    json items = json::array();
    for (const auto &c : w.children)
      items.push_back(render_tree(c));
    return json{{"node", "array"}, {"elem", to_string(w.elem)}, {"items", items}};
  }
  case mtree::kind::struct_: {
    json fields = json::array();
    for (std::size_t i = 0; i < w.children.size(); ++i)
      fields.push_back(json{{"tree", render_tree(w.children[i])}, {"pad", render_pbits(w.pads[i])}});
    return json{{"node", "struct"}, {"tag", w.tag}, {"fields", fields}};
  }
  case mtree::kind::union_:
    return json{{"node", "union"},
                {"tag", w.tag},
                {"variant", w.variant},
                {"tree", render_tree(w.children[0])},
                {"pad", render_pbits(w.bits)}};
  case mtree::kind::union_all: {
    json j{{"node", "union_all"}, {"tag", w.tag}};
    j.update(render_pbits(w.bits));
    return j;
  }
  }
  return nullptr;
}

inline json render_val(const val &v) {
  switch (v.k) {
  case val::kind::base: {
    const base_val &b = v.b;
    json j{{"type", to_string(type_of(b))}};
    switch (b.k) {
    case base_val::kind::indet:
      j["value"] = "indet";
      break;
    case base_val::kind::void_:
      j["value"] = "void";
      break;
    case base_val::kind::integer:
      j["value"] = b.x.str();
      break;
    case base_val::kind::pointer:
      j["value"] = to_string(b.p);
      break;
    case base_val::kind::byte:
      j["value"] = "byte " + to_string(b.bits);
      break;
    }
    return j;
  }
  case val::kind::array:
  case val::kind::struct_:
  case val::kind::union_all: {
    json items = json::array();
    for (const auto &c : v.children)
      items.push_back(render_val(c));
    json j{{"type", to_string(type_of(v))}};
    if (v.k == val::kind::union_all)
      j["variant"] = "unknown";
    j["items"] = items;
    return j;
  }
  case val::kind::union_:
    return json{{"type", to_string(type_of(v))},
                {"variant", v.variant},
                {"item", render_val(v.children[0])}};
  }
  return nullptr;
}

inline json render_mem(const mem &m) {
  json objects = json::object();
  for (const auto &[o, c] : m.cells) {
    if (const auto *l = std::get_if<live_object>(&c))
      objects[std::to_string(o)] = json{{"type", to_string(type_of(l->tree))},
                                        {"malloced", l->malloced},
                                        {"tree", render_tree(l->tree)}};
    else
      objects[std::to_string(o)] = json{{"dead", true}, {"type", to_string(std::get<type>(c))}};
  }
  json locks = json::array();
  for (const auto &[o, i] : mem_locks(m))
    locks.push_back(json::array({o, i}));
  return json{{"objects", objects}, {"locks", locks}};
}

inline std::string dump_state(const mem &m, int indent = -1) {
  return render_mem(m).dump(indent);
}

} // namespace ch2o
