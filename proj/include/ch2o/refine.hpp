// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/memsep.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ch2o {

// A renaming sends each source object to a target object and a reference to
// the subobject of the target that represents it.
using renaming = std::map<object_id, std::pair<object_id, ref>>;

// The identity renaming on the objects of d.
inline renaming renaming_id(const mem_env &d) {
  renaming f;
  for (const auto &[o, _] : d)
    f[o] = {o, {}};
  return f;
}

inline renaming renaming_id(const mem &m) { return renaming_id(mem_env_of(m)); }

// g after f: the reference into the final target is the reference chosen by g
// followed by the one chosen by f.
inline renaming renaming_compose(const renaming &g, const renaming &f) {
  renaming out;
  for (const auto &[o1, t] : f) {
    auto it = g.find(t.first);
    if (it == g.end())
      continue;
    ref r = it->second.second;
    r.insert(r.end(), t.second.begin(), t.second.end());
    out[o1] = {it->second.first, std::move(r)};
  }
  return out;
}

// Why f fails to relate d1 to d2, if it does.
inline std::optional<std::string> renaming_invalid(const env &e, const renaming &f,
                                                   const mem_env &d1, const mem_env &d2) {
  for (const auto &[o1, _] : d1)
    if (!f.count(o1))
      return "object " + std::to_string(o1) + " is not renamed";
  for (auto i = f.begin(); i != f.end(); ++i)
    for (auto j = std::next(i); j != f.end(); ++j)
      if (i->second.first == j->second.first &&
          !ref_disjoint(i->second.second, j->second.second))
        return "objects " + std::to_string(i->first) + " and " + std::to_string(j->first) +
               " overlap in the target (injectivity)";
  for (const auto &[o1, t] : f) {
    const auto &[o2, r] = t;
    std::string who = "object " + std::to_string(o1);
    if (!is_frozen(r))
      return who + " is renamed along an unfrozen reference";
    const type *s = index_typed(d1, o1);
    const type *u = index_typed(d2, o2);
    if (s || u) {
      if (!s || !u)
        return who + " is typed on one side only";
      auto sub = ref_typed(e, r, *u);
      if (!sub || !(*sub == *s))
        return who + " has type " + to_string(*s) + " but the target subobject does not";
    }
    if (index_alive(d1, o1) && !index_alive(d2, o2))
      return who + " is alive but its target is not";
  }
  return std::nullopt;
}

inline bool renaming_valid(const env &e, const renaming &f, const mem_env &d1,
                           const mem_env &d2) {
  return !renaming_invalid(e, f, d1, d2);
}

// A step of a target reference may drop the frozen mark of the source step.
inline bool ref_seg_refine(const ref_seg &s1, const ref_seg &s2) {
  return freeze(s1) == freeze(s2) && (s1.frozen || !s2.frozen);
}

// The address that f makes of a. Whole-object addresses into an array element
// of the target move the element index into the byte offset.
inline std::optional<addr> rename_addr(const env &e, const renaming &f, const mem_env &d2,
                                       const addr &a) {
  auto it = f.find(a.index);
  if (it == f.end())
    return std::nullopt;
  const type *t2 = index_typed(d2, it->second.first);
  if (!t2)
    return std::nullopt;
  addr out = a;
  out.index = it->second.first;
  out.obj = *t2;
  const ref &r = it->second.second;
  if (a.r.empty()) {
    out.r = ref_set_offset(0, r);
    out.byte = a.byte + ref_offset(r) * size_of(e, a.sub);
  } else {
    out.r = r;
    out.r.insert(out.r.end(), a.r.begin(), a.r.end());
  }
  return out;
}

inline bool addr_refine(const env &e, const renaming &f, const mem_env &d1,
                        const mem_env &d2, const addr &a1, const addr &a2) {
  if (!addr_typed(e, d1, a1) || !addr_typed(e, d2, a2))
    return false;
  auto b = rename_addr(e, f, d2, a1);
  if (!b || b->index != a2.index || !(b->obj == a2.obj) || b->byte != a2.byte ||
      !(b->sub == a2.sub) || !(b->cast == a2.cast) || b->r.size() != a2.r.size())
    return false;
  for (std::size_t i = 0; i < a2.r.size(); ++i)
    if (!ref_seg_refine(b->r[i], a2.r[i]))
      return false;
  return true;
}

inline bool ptr_refine(const env &e, const renaming &f, const mem_env &d1, const mem_env &d2,
                       const ptr &p1, const ptr &p2) {
  if (p1.k != p2.k || !(type_of(p1) == type_of(p2)))
    return false;
  switch (p1.k) {
  case ptr::kind::null:
    return ptr_typed(e, d1, p1) && ptr_typed(e, d2, p2);
  case ptr::kind::function:
    return p1 == p2 && ptr_typed(e, d1, p1);
  case ptr::kind::address:
    return addr_refine(e, f, d1, d2, p1.a, p2.a);
  }
  return false;
}

// A fragment of a pointer to a deallocated object carries no information.
inline bool bit_dead_frag(const env &e, const mem_env &d1, const bit &b) {
  return b.k == bit::kind::frag && b.p->k == ptr::kind::address &&
         addr_typed(e, d1, b.p->a) && !index_alive(d1, b.p->a.index);
}

inline bool bit_refine(const env &e, const renaming &f, const mem_env &d1, const mem_env &d2,
                       const bit &b1, const bit &b2) {
  if (b1.is_concrete() && b1 == b2)
    return true;
  if (b1.k == bit::kind::frag && b2.k == bit::kind::frag && b1.i == b2.i &&
      ptr_refine(e, f, d1, d2, *b1.p, *b2.p) && ptr_frozen(*b2.p) && b1.i < ptr_bit_size(e))
    return true;
  if (b1.is_indet() || bit_dead_frag(e, d1, b1))
    return bit_valid(e, d2, b2);
  return false;
}

inline bool pbit_refine(const env &e, const renaming &f, const mem_env &d1, const mem_env &d2,
                        const pbit &x1, const pbit &x2) {
  return x1.value == x2.value && pbit_valid(e, d1, x1) && pbit_valid(e, d2, x2) &&
         bit_refine(e, f, d1, d2, x1.tag, x2.tag);
}

inline bool pbits_refine(const env &e, const renaming &f, const mem_env &d1,
                         const mem_env &d2, const std::vector<pbit> &xs1,
                         const std::vector<pbit> &xs2) {
  if (xs1.size() != xs2.size())
    return false;
  for (std::size_t i = 0; i < xs1.size(); ++i)
    if (!pbit_refine(e, f, d1, d2, xs1[i], xs2[i]))
      return false;
  return true;
}

namespace detail {

inline bool tree_refine_go(const env &e, const renaming &f, const mem_env &d1,
                           const mem_env &d2, const mtree &w1, const mtree &w2) {
  using K = mtree::kind;
  if (w1.k == K::union_ && w2.k == K::union_all) {
    auto xs = tree_flatten(w1);
    return w1.tag == w2.tag && all_indet(w1.bits) && !all_unmapped(xs) && all_unshared(xs) &&
           pbits_refine(e, f, d1, d2, xs, w2.bits);
  }
  if (!same_shape(w1, w2))
    return false;
  switch (w1.k) {
  case K::base:
  case K::union_all:
    return pbits_refine(e, f, d1, d2, w1.bits, w2.bits);
  case K::array:
    for (std::size_t i = 0; i < w1.children.size(); ++i)
      if (!tree_refine_go(e, f, d1, d2, w1.children[i], w2.children[i]))
        return false;
    return true;
  case K::struct_:
    for (std::size_t i = 0; i < w1.children.size(); ++i)
      if (!tree_refine_go(e, f, d1, d2, w1.children[i], w2.children[i]) ||
          !pbits_refine(e, f, d1, d2, w1.pads[i], w2.pads[i]))
        return false;
    return true;
  case K::union_:
    return tree_refine_go(e, f, d1, d2, w1.children[0], w2.children[0]) &&
           pbits_refine(e, f, d1, d2, w1.bits, w2.bits);
  }
  return false;
}

} // namespace detail

// Whether every union in w, in known or unknown variant, has unshared bits.
inline bool unions_unshared(const mtree &w) {
  if (w.k == mtree::kind::union_ || w.k == mtree::kind::union_all)
    return all_unshared(tree_flatten(w));
  return std::all_of(w.children.begin(), w.children.end(),
                     [](const mtree &c) { return unions_unshared(c); });
}

// Both trees must have type t; the target may have more defined bits and
// unions in unknown variant where the source has a known one. Only unions
// with unshared permissions may forget their variant, since reading an
// unknown-variant union requires them.
inline bool tree_refine(const env &e, const renaming &f, const mem_env &d1, const mem_env &d2,
                        const mtree &w1, const mtree &w2, const type &t) {
  return tree_typed(e, d1, w1, t) && tree_typed(e, d2, w2, t) &&
         detail::tree_refine_go(e, f, d1, d2, w1, w2);
}

inline bool base_val_refine(const env &e, const renaming &f, const mem_env &d1,
                            const mem_env &d2, const base_val &v1, const base_val &v2,
                            const base_type &bt) {
  if (!base_val_typed(e, d1, v1, bt) || !base_val_typed(e, d2, v2, bt))
    return false;
  switch (v1.k) {
  case base_val::kind::indet:
    return true;
  case base_val::kind::void_:
  case base_val::kind::integer:
    return v1 == v2;
  case base_val::kind::pointer:
    if (v1.p.k == ptr::kind::address && !index_alive(d1, v1.p.a.index))
      return true;
    return v2.k == base_val::kind::pointer && ptr_refine(e, f, d1, d2, v1.p, v2.p);
  case base_val::kind::byte: {
    auto bs2 = base_flatten(e, v2);
    if (bs2.size() != v1.bits.size())
      return false;
    for (std::size_t i = 0; i < bs2.size(); ++i)
      if (!bit_refine(e, f, d1, d2, v1.bits[i], bs2[i]))
        return false;
    return true;
  }
  }
  return false;
}

inline bool val_refine(const env &e, const renaming &f, const mem_env &d1, const mem_env &d2,
                       const val &v1, const val &v2, const type &t) {
  if (!val_typed(e, d1, v1, t) || !val_typed(e, d2, v2, t))
    return false;
  if (v1.k == val::kind::union_ && v2.k == val::kind::union_all) {
    auto bs1 = pad_indet(val_flatten(e, v1), bit_size_of(e, t));
    auto bs2 = val_flatten(e, v2);
    if (bs1.size() != bs2.size())
      return false;
    for (std::size_t i = 0; i < bs1.size(); ++i)
      if (!bit_refine(e, f, d1, d2, bs1[i], bs2[i]))
        return false;
    return true;
  }
  if (v1.k != v2.k)
    return false;
  switch (v1.k) {
  case val::kind::base:
    return base_val_refine(e, f, d1, d2, v1.b, v2.b, t.base);
  case val::kind::array:
  case val::kind::struct_:
  case val::kind::union_all: {
    const auto &fs = t.is_array() ? std::vector<type>(t.n, t.element()) : fields_of(e, t);
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (!val_refine(e, f, d1, d2, v1.children[i], v2.children[i], fs[i]))
        return false;
    return true;
  }
  case val::kind::union_:
    return v1.variant == v2.variant &&
           val_refine(e, f, d1, d2, v1.children[0], v2.children[0],
                      fields_of(e, t)[v1.variant]);
  }
  return false;
}

// Why m1 fails to refine to m2 under f, if it does. Both memories must be
// valid in their own environments.
inline std::optional<std::string> mem_refine_failure(const env &e, const renaming &f,
                                                     const mem &m1, const mem &m2) {
  mem_env d1 = mem_env_of(m1), d2 = mem_env_of(m2);
  if (!mem_valid(e, d1, m1))
    return "source memory is not valid";
  if (!mem_valid(e, d2, m2))
    return "target memory is not valid";
  if (auto why = renaming_invalid(e, f, d1, d2))
    return why;
  for (const auto &[o1, c] : m1.cells) {
    const auto *l1 = std::get_if<live_object>(&c);
    if (!l1)
      continue;
    const auto &[o2, r] = f.at(o1);
    std::string who = "object " + std::to_string(o1);
    const live_object *l2 = m2.live(o2);
    if (!l2)
      return who + " has no live target";
    if (r.empty() ? l1->malloced != l2->malloced : l1->malloced)
      return who + " differs in allocation kind";
    auto w2 = tree_lookup(e, r, l2->tree);
    if (!w2)
      return who + " has no target subobject";
    if (!tree_refine(e, f, d1, d2, l1->tree, *w2, type_of(l1->tree)))
      return who + " does not refine its target subobject";
  }
  return std::nullopt;
}

inline bool mem_refine(const env &e, const renaming &f, const mem &m1, const mem &m2) {
  return !mem_refine_failure(e, f, m1, m2);
}

} // namespace ch2o
