// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/memplace.hpp"
#include "ch2o/perm.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ch2o {

// A bit of an object representation: indeterminate, concrete, or the i-th
// bit of a pointer.
struct bit {
  enum class kind { indet, zero, one, frag };
  kind k = kind::indet;
  std::shared_ptr<const ptr> p;
  std::size_t i = 0;

  bool is_indet() const { return k == kind::indet; }
  bool is_concrete() const { return k == kind::zero || k == kind::one; }

  friend bool operator==(const bit &a, const bit &b) {
    if (a.k != b.k)
      return false;
    if (a.k != kind::frag)
      return true;
    return a.i == b.i && (a.p == b.p || *a.p == *b.p);
  }
};

inline bit bit_indet() { return {}; }
inline bit bit_of(bool b) { return {b ? bit::kind::one : bit::kind::zero, nullptr, 0}; }
inline bit bit_frag(std::shared_ptr<const ptr> p, std::size_t i) {
  return {bit::kind::frag, std::move(p), i};
}

inline std::string to_string(const bit &b) {
  switch (b.k) {
  case bit::kind::indet:
    return "x";
  case bit::kind::zero:
    return "0";
  case bit::kind::one:
    return "1";
  case bit::kind::frag:
    switch (b.p->k) {
    case ptr::kind::null:
      return "p:null:" + std::to_string(b.i);
    case ptr::kind::function:
      return "p:&" + b.p->fn + ":" + std::to_string(b.i);
    case ptr::kind::address:
      return "p:" + std::to_string(b.p->a.index) + ":" + std::to_string(b.i);
    }
  }
  return "?";
}

inline std::string to_string(const std::vector<bit> &bs) {
  std::string s;
  for (const auto &b : bs)
    s += to_string(b);
  return s;
}

inline std::size_t ptr_bit_size(const env &e) { return e.impl.ptr_size * e.impl.char_bits; }

inline bool bit_valid(const env &e, const mem_env &d, const bit &b) {
  if (b.k != bit::kind::frag)
    return true;
  return b.p && ptr_typed(e, d, *b.p) && ptr_frozen(*b.p) && b.i < ptr_bit_size(e);
}

inline std::vector<bit> bits_of_bools(const std::vector<bool> &bs) {
  std::vector<bit> out;
  out.reserve(bs.size());
  for (bool b : bs)
    out.push_back(bit_of(b));
  return out;
}

// Bits annotated with a permission. Unmapped permissions carry the
// indeterminate bit.
using pbit_sa = tagged_sa<perm_sa, bit>;
using pbit = pbit_sa::element;

inline const pbit_sa pbit_algebra{perm_sa{}, bit{},
                                  [](const bit &b) { return to_string(b); }};

inline pbit make_pbit(perm g, bit b) { return {std::move(g), std::move(b)}; }

inline bool pbit_valid(const env &e, const mem_env &d, const pbit &x) {
  return bit_valid(e, d, x.tag) && pbit_algebra.valid(x);
}

inline bool all_indet(const std::vector<pbit> &xs) {
  return std::all_of(xs.begin(), xs.end(), [](const pbit &x) { return x.tag.is_indet(); });
}
inline bool all_unmapped(const std::vector<pbit> &xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](const pbit &x) { return pbit_algebra.unmapped(x); });
}
inline bool all_unshared(const std::vector<pbit> &xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](const pbit &x) { return pbit_algebra.unshared(x); });
}

inline std::vector<pbit> indetify(std::vector<pbit> xs) {
  for (auto &x : xs)
    x.tag = bit_indet();
  return xs;
}

inline std::vector<pbit> zip_pbits(const std::vector<perm> &gs, const std::vector<bit> &bs) {
  if (gs.size() != bs.size())
    throw error("zip_pbits: length mismatch");
  std::vector<pbit> out;
  out.reserve(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i)
    out.push_back({gs[i], bs[i]});
  return out;
}

template <class T>
std::vector<T> slice(const std::vector<T> &xs, std::size_t from, std::size_t to) {
  if (from > to || to > xs.size())
    throw error("slice out of range");
  return std::vector<T>(xs.begin() + from, xs.begin() + to);
}

// Memory trees: the structure of an object with permission-annotated bits at
// the leaves and in padding. A union is either in a known variant (with
// padding after it) or unknown, holding only bits.
struct mtree {
  enum class kind { base, array, struct_, union_, union_all };
  kind k = kind::base;
  base_type bt{};
  type elem{};
  std::string tag;
  std::size_t variant = 0;
  std::vector<pbit> bits;
  std::vector<mtree> children;
  std::vector<std::vector<pbit>> pads;

  friend bool operator==(const mtree &, const mtree &) = default;
};

inline mtree tree_base(base_type bt, std::vector<pbit> bits) {
  mtree w;
  w.bt = std::move(bt);
  w.bits = std::move(bits);
  return w;
}
inline mtree tree_array(type elem, std::vector<mtree> ws) {
  mtree w;
  w.k = mtree::kind::array;
  w.elem = std::move(elem);
  w.children = std::move(ws);
  return w;
}
inline mtree tree_struct(std::string tag, std::vector<mtree> ws,
                         std::vector<std::vector<pbit>> pads) {
  mtree w;
  w.k = mtree::kind::struct_;
  w.tag = std::move(tag);
  w.children = std::move(ws);
  w.pads = std::move(pads);
  return w;
}
inline mtree tree_union(std::string tag, std::size_t i, mtree x, std::vector<pbit> pad) {
  mtree w;
  w.k = mtree::kind::union_;
  w.tag = std::move(tag);
  w.variant = i;
  w.children.push_back(std::move(x));
  w.bits = std::move(pad);
  return w;
}
inline mtree tree_union_all(std::string tag, std::vector<pbit> bits) {
  mtree w;
  w.k = mtree::kind::union_all;
  w.tag = std::move(tag);
  w.bits = std::move(bits);
  return w;
}

inline type type_of(const mtree &w) {
  switch (w.k) {
  case mtree::kind::base:
    return base_t(w.bt);
  case mtree::kind::array:
    return array_t(w.elem, w.children.size());
  case mtree::kind::struct_:
    return struct_t(w.tag);
  default:
    return union_t(w.tag);
  }
}

namespace detail {
inline void flatten_into(const mtree &w, std::vector<pbit> &out) {
  switch (w.k) {
  case mtree::kind::base:
  case mtree::kind::union_all:
    out.insert(out.end(), w.bits.begin(), w.bits.end());
    break;
  case mtree::kind::array:
    for (const auto &c : w.children)
      flatten_into(c, out);
    break;
  case mtree::kind::struct_:
    for (std::size_t i = 0; i < w.children.size(); ++i) {
      flatten_into(w.children[i], out);
      out.insert(out.end(), w.pads[i].begin(), w.pads[i].end());
    }
    break;
  case mtree::kind::union_:
    flatten_into(w.children[0], out);
    out.insert(out.end(), w.bits.begin(), w.bits.end());
    break;
  }
}
} // namespace detail

inline std::vector<pbit> tree_flatten(const mtree &w) {
  std::vector<pbit> out;
  detail::flatten_into(w, out);
  return out;
}

inline std::vector<perm> perms_of(const std::vector<pbit> &xs) {
  std::vector<perm> out;
  out.reserve(xs.size());
  for (const auto &x : xs)
    out.push_back(x.value);
  return out;
}

inline std::vector<bit> bits_of(const std::vector<pbit> &xs) {
  std::vector<bit> out;
  out.reserve(xs.size());
  for (const auto &x : xs)
    out.push_back(x.tag);
  return out;
}

inline mtree tree_unflatten(const env &e, const type &t, const std::vector<pbit> &xs) {
  if (xs.size() != bit_size_of(e, t))
    throw error("tree_unflatten: " + std::to_string(xs.size()) + " bits for " +
                to_string(t));
  switch (t.k) {
  case type::kind::base:
    return tree_base(t.base, xs);
  case type::kind::array: {
    std::size_t s = bit_size_of(e, t.element());
    std::vector<mtree> ws;
    for (std::size_t j = 0; j < t.n; ++j)
      ws.push_back(tree_unflatten(e, t.element(), slice(xs, j * s, (j + 1) * s)));
    return tree_array(t.element(), std::move(ws));
  }
  case type::kind::struct_: {
    const auto &fs = fields_of(e, t);
    auto sizes = field_bit_sizes(e, t);
    std::vector<mtree> ws;
    std::vector<std::vector<pbit>> pads;
    std::size_t z = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      std::size_t s = bit_size_of(e, fs[i]);
      ws.push_back(tree_unflatten(e, fs[i], slice(xs, z, z + s)));
      pads.push_back(indetify(slice(xs, z + s, z + sizes[i])));
      z += sizes[i];
    }
    return tree_struct(t.tag, std::move(ws), std::move(pads));
  }
  case type::kind::union_:
    return tree_union_all(t.tag, xs);
  }
  throw error("tree_unflatten: bad type");
}

inline mtree tree_new(const env &e, const type &t, const perm &g) {
  return tree_unflatten(e, t, std::vector<pbit>(bit_size_of(e, t), {g, bit_indet()}));
}

inline bool pbits_valid(const env &e, const mem_env &d, const std::vector<pbit> &xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [&](const pbit &x) { return pbit_valid(e, d, x); });
}

inline bool tree_typed(const env &e, const mem_env &d, const mtree &w, const type &t) {
  switch (w.k) {
  case mtree::kind::base:
    return t.is_base() && t.base == w.bt && base_type_valid(e.types, w.bt) &&
           pbits_valid(e, d, w.bits) && w.bits.size() == bit_size_of(e, t);
  case mtree::kind::array:
    if (!t.is_array() || t.n != w.children.size() || t.n == 0 || !(t.element() == w.elem))
      return false;
    for (const auto &c : w.children)
      if (!tree_typed(e, d, c, w.elem))
        return false;
    return true;
  case mtree::kind::struct_: {
    if (!t.is_struct() || t.tag != w.tag || !e.types.fields(t.tag))
      return false;
    const auto &fs = fields_of(e, t);
    if (fs.size() != w.children.size() || fs.size() != w.pads.size())
      return false;
    auto sizes = field_bit_sizes(e, t);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (!tree_typed(e, d, w.children[i], fs[i]))
        return false;
      const auto &pad = w.pads[i];
      if (!pbits_valid(e, d, pad) || !all_indet(pad) ||
          pad.size() != sizes[i] - bit_size_of(e, fs[i]))
        return false;
    }
    return true;
  }
  case mtree::kind::union_: {
    if (!t.is_union() || t.tag != w.tag || !e.types.fields(t.tag))
      return false;
    const auto &fs = fields_of(e, t);
    if (w.variant >= fs.size() || w.children.size() != 1)
      return false;
    if (!tree_typed(e, d, w.children[0], fs[w.variant]))
      return false;
    if (!pbits_valid(e, d, w.bits) || !all_indet(w.bits))
      return false;
    if (bit_size_of(e, t) != bit_size_of(e, fs[w.variant]) + w.bits.size())
      return false;
    return !all_unmapped(tree_flatten(w));
  }
  case mtree::kind::union_all:
    return t.is_union() && t.tag == w.tag && e.types.fields(t.tag) &&
           pbits_valid(e, d, w.bits) && w.bits.size() == bit_size_of(e, t);
  }
  return false;
}

// Why a lookup along a reference failed.
enum class lookup_failure {
  none,
  // Index past the end of an array, or a step of the wrong shape.
  out_of_range,
  // A frozen union step into a different variant than the stored one.
  variant,
  // Reinterpreting another variant needs unshared permissions.
  shared,
};

inline std::optional<mtree> tree_lookup_seg(const env &e, const ref_seg &s,
                                            const mtree &w,
                                            lookup_failure *why = nullptr) {
  auto fail = [&](lookup_failure f) -> std::optional<mtree> {
    if (why)
      *why = f;
    return std::nullopt;
  };
  switch (s.k) {
  case ref_seg::kind::array:
    if (w.k != mtree::kind::array || w.children.size() != s.n || !(w.elem == s.elem) ||
        s.i >= s.n)
      return fail(lookup_failure::out_of_range);
    return w.children[s.i];
  case ref_seg::kind::struct_:
    if (w.k != mtree::kind::struct_ || w.tag != s.tag || s.i >= w.children.size())
      return fail(lookup_failure::out_of_range);
    return w.children[s.i];
  case ref_seg::kind::union_: {
    if ((w.k != mtree::kind::union_ && w.k != mtree::kind::union_all) || w.tag != s.tag)
      return fail(lookup_failure::out_of_range);
    const auto &fs = fields_of(e, union_t(s.tag));
    if (s.i >= fs.size())
      return fail(lookup_failure::out_of_range);
    if (w.k == mtree::kind::union_ && w.variant == s.i)
      return w.children[0];
    if (w.k == mtree::kind::union_ && s.frozen)
      return fail(lookup_failure::variant);
    auto xs = tree_flatten(w);
    if (!all_unshared(xs))
      return fail(lookup_failure::shared);
    return tree_unflatten(e, fs[s.i], slice(xs, 0, bit_size_of(e, fs[s.i])));
  }
  }
  return fail(lookup_failure::out_of_range);
}

inline std::optional<mtree> tree_lookup(const env &e, const ref &r, const mtree &w,
                                        lookup_failure *why = nullptr) {
  std::optional<mtree> cur = w;
  for (const auto &s : r) {
    cur = tree_lookup_seg(e, s, *cur, why);
    if (!cur)
      return std::nullopt;
  }
  return cur;
}

using tree_fn = std::function<mtree(const mtree &)>;

// Applies f to the subtree at r. Stepping into a different union variant
// reinterprets the bits of the stored variant and indetifies the rest. Only
// meaningful where the lookup along r succeeds; returns nothing on a shape
// mismatch.
inline std::optional<mtree> tree_alter(const env &e, const tree_fn &f, const ref &r,
                                       const mtree &w, std::size_t from = 0) {
  if (from == r.size())
    return f(w);
  const ref_seg &s = r[from];
  mtree out = w;
  switch (s.k) {
  case ref_seg::kind::array:
  case ref_seg::kind::struct_: {
    bool arr = s.k == ref_seg::kind::array;
    if (w.k != (arr ? mtree::kind::array : mtree::kind::struct_) ||
        s.i >= w.children.size() || (!arr && w.tag != s.tag) ||
        (arr && w.children.size() != s.n))
      return std::nullopt;
    auto c = tree_alter(e, f, r, w.children[s.i], from + 1);
    if (!c)
      return std::nullopt;
    out.children[s.i] = std::move(*c);
    return out;
  }
  case ref_seg::kind::union_: {
    if ((w.k != mtree::kind::union_ && w.k != mtree::kind::union_all) || w.tag != s.tag)
      return std::nullopt;
    const auto &fs = fields_of(e, union_t(s.tag));
    if (s.i >= fs.size())
      return std::nullopt;
    if (w.k == mtree::kind::union_ && w.variant == s.i) {
      auto c = tree_alter(e, f, r, w.children[0], from + 1);
      if (!c)
        return std::nullopt;
      out.children[0] = std::move(*c);
      return out;
    }
    auto xs = tree_flatten(w);
    std::size_t sz = bit_size_of(e, fs[s.i]);
    auto c = tree_alter(e, f, r, tree_unflatten(e, fs[s.i], slice(xs, 0, sz)), from + 1);
    if (!c)
      return std::nullopt;
    return tree_union(s.tag, s.i, std::move(*c), indetify(slice(xs, sz, xs.size())));
  }
  }
  return std::nullopt;
}

// Combines the bits of w, in flattened order, with ys using f.
template <class Y, class F>
mtree tree_merge(const F &f, const mtree &w, const std::vector<Y> &ys) {
  std::size_t pos = 0;
  std::function<mtree(const mtree &)> go = [&](const mtree &t) -> mtree {
    auto merge_bits = [&](const std::vector<pbit> &xs) {
      std::vector<pbit> out;
      out.reserve(xs.size());
      for (const auto &x : xs) {
        if (pos >= ys.size())
          throw error("tree_merge: too few values");
        out.push_back(f(x, ys[pos++]));
      }
      return out;
    };
    mtree r = t;
    switch (t.k) {
    case mtree::kind::base:
    case mtree::kind::union_all:
      r.bits = merge_bits(t.bits);
      break;
    case mtree::kind::array:
      for (auto &c : r.children)
        c = go(c);
      break;
    case mtree::kind::struct_:
      for (std::size_t i = 0; i < r.children.size(); ++i) {
        r.children[i] = go(t.children[i]);
        r.pads[i] = merge_bits(t.pads[i]);
      }
      break;
    case mtree::kind::union_:
      r.children[0] = go(t.children[0]);
      r.bits = merge_bits(t.bits);
      break;
    }
    return r;
  };
  mtree out = go(w);
  if (pos != ys.size())
    throw error("tree_merge: too many values");
  return out;
}

template <class F> mtree tree_map(const F &f, const mtree &w) {
  std::vector<char> dummy(tree_flatten(w).size());
  return tree_merge([&](const pbit &x, char) { return f(x); }, w, dummy);
}

inline std::string to_string(const std::vector<pbit> &xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i != 0 && !(xs[i].value == xs[i - 1].value))
      s += " ";
    if (i == 0 || !(xs[i].value == xs[i - 1].value))
      s += to_string(xs[i].value) + ":";
    s += to_string(xs[i].tag);
  }
  return s;
}

// A compact rendering for diagnostics: runs of bits sharing a permission are
// printed after that permission.
inline std::string to_string(const mtree &w) {
  auto list = [](const std::vector<mtree> &ws) {
    std::string s;
    for (std::size_t i = 0; i < ws.size(); ++i)
      s += (i ? ", " : "") + to_string(ws[i]);
    return s;
  };
  switch (w.k) {
  case mtree::kind::base:
    return to_string(w.bt) + "[" + to_string(w.bits) + "]";
  case mtree::kind::array:
    return "array " + to_string(w.elem) + " {" + list(w.children) + "}";
  case mtree::kind::struct_: {
    std::string s = "struct " + w.tag + " {";
    for (std::size_t i = 0; i < w.children.size(); ++i)
      s += (i ? ", " : "") + to_string(w.children[i]) + " pad[" + to_string(w.pads[i]) + "]";
    return s + "}";
  }
  case mtree::kind::union_:
    return "union " + w.tag + " #" + std::to_string(w.variant) + " {" +
           to_string(w.children[0]) + " pad[" + to_string(w.bits) + "]}";
  case mtree::kind::union_all:
    return "union " + w.tag + " [" + to_string(w.bits) + "]";
  }
  return "?";
}

} // namespace ch2o
