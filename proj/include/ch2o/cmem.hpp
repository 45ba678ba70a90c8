// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/cvalue.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ch2o {

struct live_object {
  mtree tree;
  bool malloced = false;
  friend bool operator==(const live_object &, const live_object &) = default;
};

// A memory cell is a live object or the type of a deallocated one.
using mem_cell = std::variant<live_object, type>;

struct mem {
  std::map<object_id, mem_cell> cells;

  const live_object *live(object_id o) const {
    auto it = cells.find(o);
    if (it == cells.end())
      return nullptr;
    return std::get_if<live_object>(&it->second);
  }

  friend bool operator==(const mem &, const mem &) = default;
};

using lockset = std::set<std::pair<object_id, std::size_t>>;

inline mem_env mem_env_of(const mem &m) {
  mem_env d;
  for (const auto &[o, c] : m.cells) {
    if (const auto *l = std::get_if<live_object>(&c))
      d[o] = {type_of(l->tree), false};
    else
      d[o] = {std::get<type>(c), true};
  }
  return d;
}

inline bool mem_valid(const env &e, const mem_env &d, const mem &m) {
  for (const auto &[o, c] : m.cells) {
    const type *t = index_typed(d, o);
    if (!t)
      return false;
    if (const auto *l = std::get_if<live_object>(&c)) {
      if (!index_alive(d, o) || !(*t == type_of(l->tree)) ||
          !type_valid(e.types, *t) || !tree_typed(e, d, l->tree, *t))
        return false;
      auto xs = tree_flatten(l->tree);
      bool empty = std::all_of(xs.begin(), xs.end(), [](const pbit &x) {
        return x.value == perm_empty() && x.tag.is_indet();
      });
      if (empty)
        return false;
    } else {
      if (index_alive(d, o) || !(*t == std::get<type>(c)) || !type_valid(e.types, *t))
        return false;
    }
  }
  return true;
}

// Why an access failed, in the terms used by the script harness.
enum class ub_reason {
  end_of_array,
  effective_types,
  permission,
  locked,
  dead_object,
  unwritable,
  not_freeable,
};

inline const char *to_string(ub_reason r) {
  switch (r) {
  case ub_reason::end_of_array:
    return "end-of-array";
  case ub_reason::effective_types:
    return "effective-types";
  case ub_reason::permission:
    return "permission";
  case ub_reason::locked:
    return "locked";
  case ub_reason::dead_object:
    return "dead-object";
  case ub_reason::unwritable:
    return "unwritable";
  case ub_reason::not_freeable:
    return "not-freeable";
  }
  return "?";
}

inline std::optional<ub_reason> ub_reason_of(const std::string &s) {
  for (auto r : {ub_reason::end_of_array, ub_reason::effective_types, ub_reason::permission,
                 ub_reason::locked, ub_reason::dead_object, ub_reason::unwritable,
                 ub_reason::not_freeable})
    if (s == to_string(r))
      return r;
  return std::nullopt;
}

// Looks up the tree at address a. Byte addresses yield the selected byte as
// an unsigned char tree. End-of-array addresses yield nothing.
inline std::optional<mtree> cmap_lookup(const env &e, const addr &a, const mem &m,
                                        std::optional<ub_reason> *why = nullptr) {
  auto fail = [&](ub_reason r) -> std::optional<mtree> {
    if (why)
      *why = r;
    return std::nullopt;
  };
  const live_object *l = m.live(a.index);
  if (!l)
    return fail(ub_reason::dead_object);
  if (!addr_strict(e, a))
    return fail(ub_reason::end_of_array);
  lookup_failure lf = lookup_failure::none;
  auto w = tree_lookup(e, addr_ref(e, a), l->tree, &lf);
  if (!w) {
    if (lf == lookup_failure::shared)
      return fail(ub_reason::permission);
    if (lf == lookup_failure::out_of_range)
      return fail(ub_reason::end_of_array);
    return fail(ub_reason::effective_types);
  }
  if (!addr_is_byte(a))
    return w;
  std::size_t cb = e.impl.char_bits, i = addr_ref_byte(e, a);
  return tree_unflatten(e, uchar_t(), slice(tree_flatten(*w), i * cb, (i + 1) * cb));
}

// Applies f to the tree at address a. For byte addresses f receives the byte
// as an unsigned char tree and its result is spliced back into the bits of the
// enclosing subobject.
inline std::optional<mem> cmap_alter(const env &e, const tree_fn &f, const addr &a,
                                     const mem &m) {
  const live_object *l = m.live(a.index);
  if (!l)
    return std::nullopt;
  tree_fn g = f;
  if (addr_is_byte(a)) {
    std::size_t cb = e.impl.char_bits, i = addr_ref_byte(e, a) * cb, j = i + cb;
    g = [&e, f, i, j](const mtree &w) {
      auto xs = tree_flatten(w);
      auto mid = tree_flatten(f(tree_unflatten(e, uchar_t(), slice(xs, i, j))));
      if (mid.size() != j - i)
        throw error("cmap_alter: byte function changed size");
      std::copy(mid.begin(), mid.end(), xs.begin() + static_cast<std::ptrdiff_t>(i));
      return tree_unflatten(e, type_of(w), xs);
    };
  }
  auto w = tree_alter(e, g, addr_ref(e, a), l->tree);
  if (!w)
    return std::nullopt;
  mem out = m;
  std::get<live_object>(out.cells[a.index]).tree = std::move(*w);
  return out;
}

inline bool all_kind_at_least(const std::vector<pbit> &xs, perm_kind k) {
  return std::all_of(xs.begin(), xs.end(),
                     [&](const pbit &x) { return kind_le(k, kind_of(x.value)); });
}

inline std::optional<val> mem_lookup(const env &e, const addr &a, const mem &m) {
  auto w = cmap_lookup(e, a, m);
  if (!w || !all_kind_at_least(tree_flatten(*w), perm_kind::readable))
    return std::nullopt;
  return to_val(e, *w);
}

inline bool mem_writable(const env &e, const addr &a, const mem &m) {
  auto w = cmap_lookup(e, a, m);
  return w && all_kind_at_least(tree_flatten(*w), perm_kind::writable);
}

// Makes the variants of the unions on the way to a match the access. Unlike
// other alterations it works on the normalized reference even for byte
// addresses. Defined when the object is live and the lookup succeeds.
inline std::optional<mem> mem_force(const env &e, const addr &a, const mem &m) {
  if (!cmap_lookup(e, a, m))
    return std::nullopt;
  const live_object *l = m.live(a.index);
  auto w = tree_alter(e, [](const mtree &x) { return x; }, addr_ref(e, a), l->tree);
  if (!w)
    return std::nullopt;
  mem out = m;
  std::get<live_object>(out.cells[a.index]).tree = std::move(*w);
  return out;
}

// Stores v at a, keeping the permissions of the overwritten bits. Defined
// when a is writable.
inline std::optional<mem> mem_insert(const env &e, const addr &a, const val &v,
                                     const mem &m) {
  if (!mem_writable(e, a, m))
    return std::nullopt;
  return cmap_alter(
      e, [&e, &v](const mtree &w) { return of_val(e, perms_of(tree_flatten(w)), v); }, a, m);
}

inline std::optional<mem> mem_lock(const env &e, const addr &a, const mem &m) {
  if (!cmap_lookup(e, a, m))
    return std::nullopt;
  return cmap_alter(
      e,
      [](const mtree &w) {
        return tree_map([](const pbit &x) { return make_pbit(perm_lock(x.value), x.tag); }, w);
      },
      a, m);
}

inline mem mem_unlock(const lockset &omega, const mem &m) {
  mem out = m;
  for (auto &[o, c] : out.cells) {
    auto *l = std::get_if<live_object>(&c);
    if (!l)
      continue;
    std::size_t n = tree_flatten(l->tree).size();
    std::vector<char> ys(n);
    for (std::size_t i = 0; i < n; ++i)
      ys[i] = omega.count({o, i}) != 0;
    l->tree = tree_merge(
        [](const pbit &x, char y) {
          return y ? make_pbit(perm_unlock(x.value), x.tag) : x;
        },
        l->tree, ys);
  }
  return out;
}

inline lockset lock_singleton(const env &e, const addr &a) {
  lockset out;
  std::size_t off = addr_object_offset(e, a);
  std::size_t n = ptr_target_size(e, a.cast) * e.impl.char_bits;
  for (std::size_t i = off; i < off + n; ++i)
    out.insert({a.index, i});
  return out;
}

inline lockset mem_locks(const mem &m) {
  lockset out;
  for (const auto &[o, c] : m.cells) {
    const auto *l = std::get_if<live_object>(&c);
    if (!l)
      continue;
    auto xs = tree_flatten(l->tree);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (kind_of(xs[i].value) == perm_kind::locked)
        out.insert({o, i});
  }
  return out;
}

inline mem mem_alloc(const env &e, object_id o, const val &v, bool malloced, const mem &m) {
  mem out = m;
  std::vector<perm> gs(bit_size_of(e, type_of(v)), perm_full());
  out.cells[o] = live_object{of_val(e, gs, v), malloced};
  return out;
}

// Only the first element of a malloced array with full permissions on every
// bit may be freed.
inline bool mem_freeable(const env &e, const addr &a, const mem &m) {
  (void)e;
  if (a.r.size() != 1 || a.r[0].k != ref_seg::kind::array || a.r[0].i != 0 || a.byte != 0)
    return false;
  if (!(a.obj == array_t(a.r[0].elem, a.r[0].n)) || !(a.sub == a.r[0].elem))
    return false;
  const live_object *l = m.live(a.index);
  if (!l || !l->malloced)
    return false;
  auto xs = tree_flatten(l->tree);
  return std::all_of(xs.begin(), xs.end(),
                     [](const pbit &x) { return x.value == perm_full(); });
}

inline mem mem_free(object_id o, const mem &m) {
  mem out = m;
  if (const auto *l = m.live(o))
    out.cells[o] = type_of(l->tree);
  return out;
}

inline object_id fresh_index(const mem &m) {
  return m.cells.empty() ? 1 : m.cells.rbegin()->first + 1;
}

// Why a read of a would fail, if it does.
inline std::optional<ub_reason> read_failure(const env &e, const addr &a, const mem &m) {
  std::optional<ub_reason> why;
  auto w = cmap_lookup(e, a, m, &why);
  if (!w)
    return why;
  auto xs = tree_flatten(*w);
  if (all_kind_at_least(xs, perm_kind::readable))
    return std::nullopt;
  for (const auto &x : xs)
    if (kind_of(x.value) == perm_kind::locked)
      return ub_reason::locked;
  return ub_reason::permission;
}

// Why a write to a would fail, if it does.
inline std::optional<ub_reason> write_failure(const env &e, const addr &a, const mem &m) {
  std::optional<ub_reason> why;
  auto w = cmap_lookup(e, a, m, &why);
  if (!w)
    return why;
  auto xs = tree_flatten(*w);
  if (all_kind_at_least(xs, perm_kind::writable))
    return std::nullopt;
  for (const auto &x : xs)
    if (kind_of(x.value) == perm_kind::locked)
      return ub_reason::locked;
  return ub_reason::unwritable;
}

} // namespace ch2o
