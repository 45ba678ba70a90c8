// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/cmem.hpp"

#include <map>
#include <string>
#include <vector>

namespace ch2o {

namespace detail {

inline bool pbits_sep_valid(const std::vector<pbit> &xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](const pbit &x) { return pbit_algebra.valid(x); });
}

inline bool pbits_disjoint(const std::vector<pbit> &xs, const std::vector<pbit> &ys) {
  if (xs.size() != ys.size())
    return false;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!pbit_algebra.disjoint(xs[i], ys[i]))
      return false;
  return true;
}

template <class F>
std::vector<pbit> pbits_zip(const F &f, const std::vector<pbit> &xs,
                            const std::vector<pbit> &ys) {
  if (xs.size() != ys.size())
    throw error("pbits_zip: length mismatch");
  std::vector<pbit> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.push_back(f(xs[i], ys[i]));
  return out;
}

inline std::vector<pbit> pbits_union(const std::vector<pbit> &xs, const std::vector<pbit> &ys) {
  return pbits_zip([](const pbit &x, const pbit &y) { return pbit_algebra.unite(x, y); }, xs,
                   ys);
}

inline std::vector<pbit> pbits_difference(const std::vector<pbit> &xs,
                                          const std::vector<pbit> &ys) {
  return pbits_zip(
      [](const pbit &x, const pbit &y) { return pbit_algebra.difference(x, y); }, xs, ys);
}

inline bool same_shape(const mtree &a, const mtree &b) {
  if (a.k != b.k || a.children.size() != b.children.size())
    return false;
  switch (a.k) {
  case mtree::kind::base:
    return a.bt == b.bt;
  case mtree::kind::array:
    return a.elem == b.elem;
  case mtree::kind::struct_:
    return a.tag == b.tag && a.pads.size() == b.pads.size();
  case mtree::kind::union_:
    return a.tag == b.tag && a.variant == b.variant && a.children.size() == 1;
  case mtree::kind::union_all:
    return a.tag == b.tag;
  }
  return false;
}

// A union whose bits are all unmapped is kept in unknown variant.
inline mtree normalize_union(mtree w) {
  if (w.k == mtree::kind::union_) {
    auto xs = tree_flatten(w);
    if (all_unmapped(xs))
      return tree_union_all(w.tag, std::move(xs));
  }
  return w;
}

} // namespace detail

inline bool tree_sep_valid(const mtree &w) {
  switch (w.k) {
  case mtree::kind::base:
  case mtree::kind::union_all:
    return detail::pbits_sep_valid(w.bits);
  case mtree::kind::array:
    return std::all_of(w.children.begin(), w.children.end(),
                       [](const mtree &c) { return tree_sep_valid(c); });
  case mtree::kind::struct_:
    for (std::size_t i = 0; i < w.children.size(); ++i)
      if (!tree_sep_valid(w.children[i]) || !detail::pbits_sep_valid(w.pads[i]))
        return false;
    return w.children.size() == w.pads.size();
  case mtree::kind::union_:
    return w.children.size() == 1 && tree_sep_valid(w.children[0]) &&
           detail::pbits_sep_valid(w.bits) && !all_unmapped(tree_flatten(w));
  }
  return false;
}

inline bool tree_disjoint(const mtree &w1, const mtree &w2) {
  using K = mtree::kind;
  if (w1.k == K::union_ && w2.k == K::union_all) {
    auto xs = tree_flatten(w1);
    return w1.tag == w2.tag && detail::pbits_disjoint(xs, w2.bits) && tree_sep_valid(w1) &&
           !all_unmapped(xs) && all_unmapped(w2.bits);
  }
  if (w1.k == K::union_all && w2.k == K::union_)
    return tree_disjoint(w2, w1);
  if (!detail::same_shape(w1, w2))
    return false;
  switch (w1.k) {
  case K::base:
  case K::union_all:
    return detail::pbits_disjoint(w1.bits, w2.bits);
  case K::array:
    for (std::size_t i = 0; i < w1.children.size(); ++i)
      if (!tree_disjoint(w1.children[i], w2.children[i]))
        return false;
    return true;
  case K::struct_:
    for (std::size_t i = 0; i < w1.children.size(); ++i)
      if (!tree_disjoint(w1.children[i], w2.children[i]) ||
          !detail::pbits_disjoint(w1.pads[i], w2.pads[i]))
        return false;
    return true;
  case K::union_:
    return tree_disjoint(w1.children[0], w2.children[0]) &&
           detail::pbits_disjoint(w1.bits, w2.bits) && !all_unmapped(tree_flatten(w1)) &&
           !all_unmapped(tree_flatten(w2));
  }
  return false;
}

inline mtree tree_union(const mtree &w1, const mtree &w2) {
  using K = mtree::kind;
  auto unite = [](const pbit &x, const pbit &y) { return pbit_algebra.unite(x, y); };
  if (w1.k == K::union_ && w2.k == K::union_all)
    return tree_merge(unite, w1, w2.bits);
  if (w1.k == K::union_all && w2.k == K::union_)
    return tree_merge(unite, w2, w1.bits);
  if (!detail::same_shape(w1, w2))
    throw error("tree_union: trees of different shapes");
  mtree out = w1;
  switch (w1.k) {
  case K::base:
  case K::union_all:
    out.bits = detail::pbits_union(w1.bits, w2.bits);
    break;
  case K::array:
    for (std::size_t i = 0; i < w1.children.size(); ++i)
      out.children[i] = tree_union(w1.children[i], w2.children[i]);
    break;
  case K::struct_:
    for (std::size_t i = 0; i < w1.children.size(); ++i) {
      out.children[i] = tree_union(w1.children[i], w2.children[i]);
      out.pads[i] = detail::pbits_union(w1.pads[i], w2.pads[i]);
    }
    break;
  case K::union_:
    out.children[0] = tree_union(w1.children[0], w2.children[0]);
    out.bits = detail::pbits_union(w1.bits, w2.bits);
    break;
  }
  return out;
}

// w2 minus w1. Leaves subtract pointwise; a union whose remaining bits are all
// unmapped drops its variant. Trees of unrelated shapes yield w2 unchanged.
inline mtree tree_difference(const mtree &w2, const mtree &w1) {
  using K = mtree::kind;
  if (w2.k == K::union_ && w1.k == K::union_all && w2.tag == w1.tag)
    return detail::normalize_union(tree_merge(
        [](const pbit &x, const pbit &y) { return pbit_algebra.difference(x, y); }, w2,
        w1.bits));
  if (!detail::same_shape(w1, w2))
    return w2;
  mtree out = w2;
  switch (w2.k) {
  case K::base:
  case K::union_all:
    out.bits = detail::pbits_difference(w2.bits, w1.bits);
    return out;
  case K::array:
    for (std::size_t i = 0; i < w2.children.size(); ++i)
      out.children[i] = tree_difference(w2.children[i], w1.children[i]);
    return out;
  case K::struct_:
    for (std::size_t i = 0; i < w2.children.size(); ++i) {
      out.children[i] = tree_difference(w2.children[i], w1.children[i]);
      out.pads[i] = detail::pbits_difference(w2.pads[i], w1.pads[i]);
    }
    return out;
  case K::union_:
    out.children[0] = tree_difference(w2.children[0], w1.children[0]);
    out.bits = detail::pbits_difference(w2.bits, w1.bits);
    return detail::normalize_union(std::move(out));
  }
  return out;
}

// The separation algebra of trees of one type. Trees have no identity of
// their own; the tree of that type with empty permissions and indeterminate
// bits acts as one.
struct tree_sa {
  using element = mtree;
  mtree unit;

  tree_sa(const env &e, const type &t) : unit(tree_new(e, t, perm_empty())) {}

  element empty() const { return unit; }
  bool valid(const mtree &w) const { return tree_sep_valid(w); }
  bool disjoint(const mtree &a, const mtree &b) const { return tree_disjoint(a, b); }
  element unite(const mtree &a, const mtree &b) const { return tree_union(a, b); }
  element difference(const mtree &a, const mtree &b) const { return tree_difference(a, b); }
  bool subseteq(const mtree &a, const mtree &b) const {
    return subseteq_by_difference(*this, a, b);
  }
  std::string show(const mtree &w) const { return to_string(w); }
};

// Objects that consist only of indeterminate bits with empty permission carry
// no information and are never stored.
inline bool all_empty_indet(const mtree &w) {
  auto xs = tree_flatten(w);
  return std::all_of(xs.begin(), xs.end(), [](const pbit &x) {
    return x.value == perm_empty() && x.tag.is_indet();
  });
}

inline bool mem_sep_valid(const mem &m) {
  for (const auto &[o, c] : m.cells)
    if (const auto *l = std::get_if<live_object>(&c))
      if (!tree_sep_valid(l->tree) || all_empty_indet(l->tree))
        return false;
  return true;
}

inline bool mem_disjoint(const mem &m1, const mem &m2) {
  auto alone = [](const mem_cell &c) {
    const auto *l = std::get_if<live_object>(&c);
    return !l || (tree_sep_valid(l->tree) && !all_empty_indet(l->tree));
  };
  for (const auto &[o, c1] : m1.cells) {
    auto it = m2.cells.find(o);
    if (it == m2.cells.end()) {
      if (!alone(c1))
        return false;
      continue;
    }
    const auto *l1 = std::get_if<live_object>(&c1);
    const auto *l2 = std::get_if<live_object>(&it->second);
    if (!l1 || !l2 || l1->malloced != l2->malloced)
      return false;
    if (!tree_disjoint(l1->tree, l2->tree) || all_empty_indet(l1->tree) ||
        all_empty_indet(l2->tree))
      return false;
  }
  for (const auto &[o, c2] : m2.cells)
    if (!m1.cells.count(o) && !alone(c2))
      return false;
  return true;
}

inline mem mem_union(const mem &m1, const mem &m2) {
  mem out = m1;
  for (const auto &[o, c2] : m2.cells) {
    auto it = out.cells.find(o);
    if (it == out.cells.end()) {
      out.cells.emplace(o, c2);
      continue;
    }
    auto *l1 = std::get_if<live_object>(&it->second);
    const auto *l2 = std::get_if<live_object>(&c2);
    if (l1 && l2)
      l1->tree = tree_union(l1->tree, l2->tree);
  }
  return out;
}

// m2 minus m1, object by object. Objects left with nothing and tombstones
// present on both sides are dropped.
inline mem mem_difference(const mem &m2, const mem &m1) {
  mem out;
  for (const auto &[o, c2] : m2.cells) {
    auto it = m1.cells.find(o);
    if (it == m1.cells.end()) {
      out.cells.emplace(o, c2);
      continue;
    }
    const auto *l1 = std::get_if<live_object>(&it->second);
    const auto *l2 = std::get_if<live_object>(&c2);
    if (l1 && l2 && l1->malloced == l2->malloced) {
      mtree d = tree_difference(l2->tree, l1->tree);
      if (!all_empty_indet(d))
        out.cells.emplace(o, live_object{std::move(d), l2->malloced});
      continue;
    }
    if (!l1 && !l2 && std::get<type>(it->second) == std::get<type>(c2))
      continue;
    out.cells.emplace(o, c2);
  }
  return out;
}

inline std::string to_string(const mem &m) {
  std::string s = "{";
  bool first = true;
  for (const auto &[o, c] : m.cells) {
    s += (first ? "" : "; ") + std::to_string(o) + " -> ";
    first = false;
    if (const auto *l = std::get_if<live_object>(&c))
      s += (l->malloced ? "malloc " : "") + to_string(l->tree);
    else
      s += "dead " + to_string(std::get<type>(c));
  }
  return s + "}";
}

struct mem_sa {
  using element = mem;
  element empty() const { return {}; }
  bool valid(const mem &m) const { return mem_sep_valid(m); }
  bool disjoint(const mem &a, const mem &b) const { return mem_disjoint(a, b); }
  element unite(const mem &a, const mem &b) const { return mem_union(a, b); }
  element difference(const mem &a, const mem &b) const { return mem_difference(a, b); }
  bool subseteq(const mem &a, const mem &b) const {
    return subseteq_by_difference(*this, a, b);
  }
  std::string show(const mem &m) const { return to_string(m); }
};

// Memory-level disjointness order: every memory of the sample disjoint from m
// is also disjoint from m2.
inline bool mem_disjoint_le(const mem &m, const mem &m2, const std::vector<mem> &sample) {
  return list_disjoint_le(mem_sa{}, std::vector<mem>{m}, std::vector<mem>{m2}, sample);
}

} // namespace ch2o
