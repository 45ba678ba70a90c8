// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/memtree.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ch2o {

// Values of base type. A byte value holds the bits of an unsigned char that is
// neither fully concrete nor fully indeterminate.
struct base_val {
  enum class kind { indet, void_, integer, pointer, byte };
  kind k = kind::indet;
  base_type bt{};
  int_type it{};
  integer x = 0;
  ptr p{};
  std::vector<bit> bits;

  friend bool operator==(const base_val &a, const base_val &b) {
    if (a.k != b.k)
      return false;
    switch (a.k) {
    case kind::indet:
      return a.bt == b.bt;
    case kind::void_:
      return true;
    case kind::integer:
      return a.it == b.it && a.x == b.x;
    case kind::pointer:
      return a.p == b.p;
    case kind::byte:
      return a.bits == b.bits;
    }
    return false;
  }
};

inline base_val bv_indet(base_type bt) {
  base_val v;
  v.bt = std::move(bt);
  return v;
}
inline base_val bv_void() {
  base_val v;
  v.k = base_val::kind::void_;
  return v;
}
inline base_val bv_int(int_type it, integer x) {
  base_val v;
  v.k = base_val::kind::integer;
  v.it = it;
  v.x = std::move(x);
  return v;
}
inline base_val bv_ptr(ptr p) {
  base_val v;
  v.k = base_val::kind::pointer;
  v.p = std::move(p);
  return v;
}
inline base_val bv_byte(std::vector<bit> bs) {
  base_val v;
  v.k = base_val::kind::byte;
  v.bits = std::move(bs);
  return v;
}

inline base_type type_of(const base_val &v) {
  switch (v.k) {
  case base_val::kind::indet:
    return v.bt;
  case base_val::kind::void_:
    return void_base();
  case base_val::kind::integer:
    return int_base(v.it);
  case base_val::kind::pointer:
    return ptr_base(type_of(v.p));
  case base_val::kind::byte:
    return int_base(uchar_int);
  }
  return {};
}

inline std::string to_string(const base_val &v) {
  switch (v.k) {
  case base_val::kind::indet:
    return "indet";
  case base_val::kind::void_:
    return "void";
  case base_val::kind::integer:
    return v.x.str();
  case base_val::kind::pointer:
    return to_string(v.p);
  case base_val::kind::byte:
    return "byte(" + to_string(v.bits) + ")";
  }
  return "?";
}

inline bool base_val_typed(const env &e, const mem_env &d, const base_val &v,
                           const base_type &bt) {
  switch (v.k) {
  case base_val::kind::indet:
    return v.bt == bt && base_type_valid(e.types, bt) && bt.k != base_type::kind::void_;
  case base_val::kind::void_:
    return bt.k == base_type::kind::void_;
  case base_val::kind::integer:
    return bt == int_base(v.it) && int_typed(e.impl, v.x, v.it);
  case base_val::kind::pointer:
    return bt == ptr_base(type_of(v.p)) && ptr_typed(e, d, v.p);
  case base_val::kind::byte: {
    if (!(bt == int_base(uchar_int)) || v.bits.size() != e.impl.char_bits)
      return false;
    bool all_concrete = true, all_ind = true;
    for (const auto &b : v.bits) {
      if (!bit_valid(e, d, b))
        return false;
      all_concrete = all_concrete && b.is_concrete();
      all_ind = all_ind && b.is_indet();
    }
    return !all_concrete && !all_ind;
  }
  }
  return false;
}

inline std::vector<bit> base_flatten(const env &e, const base_val &v) {
  switch (v.k) {
  case base_val::kind::indet:
    return std::vector<bit>(bit_size_of(e, base_t(v.bt)), bit_indet());
  case base_val::kind::void_:
    return std::vector<bit>(bit_size_of(e, void_t()), bit_indet());
  case base_val::kind::integer:
    return bits_of_bools(int_to_bits(e.impl, v.it, v.x));
  case base_val::kind::pointer: {
    auto p = std::make_shared<const ptr>(freeze(v.p));
    std::vector<bit> out;
    for (std::size_t i = 0; i < ptr_bit_size(e); ++i)
      out.push_back(bit_frag(p, i));
    return out;
  }
  case base_val::kind::byte:
    return v.bits;
  }
  return {};
}

inline base_val base_unflatten(const env &e, const base_type &bt, const std::vector<bit> &bs) {
  switch (bt.k) {
  case base_type::kind::void_:
    return bv_void();
  case base_type::kind::integer: {
    bool all_concrete = true, all_ind = true;
    for (const auto &b : bs) {
      all_concrete = all_concrete && b.is_concrete();
      all_ind = all_ind && b.is_indet();
    }
    if (all_concrete) {
      std::vector<bool> raw;
      for (const auto &b : bs)
        raw.push_back(b.k == bit::kind::one);
      return bv_int(bt.it, int_of_bits(e.impl, bt.it, raw));
    }
    if (bt.it == uchar_int && !all_ind)
      return bv_byte(bs);
    return bv_indet(bt);
  }
  case base_type::kind::pointer: {
    if (bs.empty() || bs[0].k != bit::kind::frag)
      return bv_indet(bt);
    const auto &p = bs[0].p;
    if (!(type_of(*p) == *bt.ptr) || bs.size() != ptr_bit_size(e))
      return bv_indet(bt);
    for (std::size_t i = 0; i < bs.size(); ++i)
      if (bs[i].k != bit::kind::frag || bs[i].i != i || !(*bs[i].p == *p))
        return bv_indet(bt);
    return bv_ptr(*p);
  }
  }
  return bv_indet(bt);
}

// Values: base values, arrays, structs, unions in a known variant, and unions
// whose variant is unknown (one reading per variant).
struct val {
  enum class kind { base, array, struct_, union_, union_all };
  kind k = kind::base;
  base_val b{};
  type elem{};
  std::string tag;
  std::size_t variant = 0;
  std::vector<val> children;

  friend bool operator==(const val &, const val &) = default;
};

inline val v_base(base_val b) {
  val v;
  v.b = std::move(b);
  return v;
}
inline val v_int(int_type it, integer x) { return v_base(bv_int(it, std::move(x))); }
inline val v_array(type elem, std::vector<val> vs) {
  val v;
  v.k = val::kind::array;
  v.elem = std::move(elem);
  v.children = std::move(vs);
  return v;
}
inline val v_struct(std::string tag, std::vector<val> vs) {
  val v;
  v.k = val::kind::struct_;
  v.tag = std::move(tag);
  v.children = std::move(vs);
  return v;
}
inline val v_union(std::string tag, std::size_t i, val x) {
  val v;
  v.k = val::kind::union_;
  v.tag = std::move(tag);
  v.variant = i;
  v.children.push_back(std::move(x));
  return v;
}
inline val v_union_all(std::string tag, std::vector<val> vs) {
  val v;
  v.k = val::kind::union_all;
  v.tag = std::move(tag);
  v.children = std::move(vs);
  return v;
}

inline type type_of(const val &v) {
  switch (v.k) {
  case val::kind::base:
    return base_t(type_of(v.b));
  case val::kind::array:
    return array_t(v.elem, v.children.size());
  case val::kind::struct_:
    return struct_t(v.tag);
  default:
    return union_t(v.tag);
  }
}

inline std::string to_string(const val &v) {
  switch (v.k) {
  case val::kind::base:
    return to_string(v.b);
  case val::kind::array:
  case val::kind::struct_: {
    std::string s = "{";
    for (std::size_t i = 0; i < v.children.size(); ++i)
      s += (i ? ", " : "") + to_string(v.children[i]);
    return s + "}";
  }
  case val::kind::union_:
    return "{#" + std::to_string(v.variant) + " = " + to_string(v.children[0]) + "}";
  case val::kind::union_all: {
    std::string s = "{all ";
    for (std::size_t i = 0; i < v.children.size(); ++i)
      s += (i ? " | " : "") + to_string(v.children[i]);
    return s + "}";
  }
  }
  return "?";
}

// Least upper bound of two bits where indeterminate bits are the bottom.
inline std::optional<bit> bit_join(const bit &a, const bit &b) {
  if (a.is_indet())
    return b;
  if (b.is_indet() || a == b)
    return a;
  return std::nullopt;
}

inline std::optional<std::vector<bit>> bits_join(const std::vector<bit> &a,
                                                 const std::vector<bit> &b) {
  if (a.size() != b.size())
    return std::nullopt;
  std::vector<bit> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto j = bit_join(a[i], b[i]);
    if (!j)
      return std::nullopt;
    out.push_back(std::move(*j));
  }
  return out;
}

inline std::vector<bit> pad_indet(std::vector<bit> bs, std::size_t n) {
  if (bs.size() > n)
    throw error("pad_indet: value larger than slot");
  bs.resize(n, bit_indet());
  return bs;
}

std::optional<std::vector<bit>> val_flatten_opt(const env &e, const val &v);

inline std::optional<std::vector<bit>> val_flatten_opt(const env &e, const val &v) {
  switch (v.k) {
  case val::kind::base:
    return base_flatten(e, v.b);
  case val::kind::array: {
    std::vector<bit> out;
    for (const auto &c : v.children) {
      auto bs = val_flatten_opt(e, c);
      if (!bs)
        return std::nullopt;
      out.insert(out.end(), bs->begin(), bs->end());
    }
    return out;
  }
  case val::kind::struct_: {
    auto sizes = field_bit_sizes(e, struct_t(v.tag));
    if (sizes.size() != v.children.size())
      return std::nullopt;
    std::vector<bit> out;
    for (std::size_t i = 0; i < v.children.size(); ++i) {
      auto bs = val_flatten_opt(e, v.children[i]);
      if (!bs || bs->size() > sizes[i])
        return std::nullopt;
      auto padded = pad_indet(std::move(*bs), sizes[i]);
      out.insert(out.end(), padded.begin(), padded.end());
    }
    return out;
  }
  case val::kind::union_: {
    auto bs = val_flatten_opt(e, v.children[0]);
    std::size_t n = bit_size_of(e, union_t(v.tag));
    if (!bs || bs->size() > n)
      return std::nullopt;
    return pad_indet(std::move(*bs), n);
  }
  case val::kind::union_all: {
    std::size_t n = bit_size_of(e, union_t(v.tag));
    std::vector<bit> acc(n, bit_indet());
    for (const auto &c : v.children) {
      auto bs = val_flatten_opt(e, c);
      if (!bs || bs->size() > n)
        return std::nullopt;
      auto j = bits_join(acc, pad_indet(std::move(*bs), n));
      if (!j)
        return std::nullopt;
      acc = std::move(*j);
    }
    return acc;
  }
  }
  return std::nullopt;
}

inline std::vector<bit> val_flatten(const env &e, const val &v) {
  auto bs = val_flatten_opt(e, v);
  if (!bs)
    throw error("val_flatten: union readings disagree in " + to_string(v));
  return *bs;
}

inline val val_unflatten(const env &e, const type &t, const std::vector<bit> &bs) {
  if (bs.size() != bit_size_of(e, t))
    throw error("val_unflatten: " + std::to_string(bs.size()) + " bits for " + to_string(t));
  switch (t.k) {
  case type::kind::base:
    return v_base(base_unflatten(e, t.base, bs));
  case type::kind::array: {
    std::size_t s = bit_size_of(e, t.element());
    std::vector<val> vs;
    for (std::size_t j = 0; j < t.n; ++j)
      vs.push_back(val_unflatten(e, t.element(), slice(bs, j * s, (j + 1) * s)));
    return v_array(t.element(), std::move(vs));
  }
  case type::kind::struct_: {
    const auto &fs = fields_of(e, t);
    auto sizes = field_bit_sizes(e, t);
    std::vector<val> vs;
    std::size_t z = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      vs.push_back(val_unflatten(e, fs[i], slice(bs, z, z + bit_size_of(e, fs[i]))));
      z += sizes[i];
    }
    return v_struct(t.tag, std::move(vs));
  }
  case type::kind::union_: {
    std::vector<val> vs;
    for (const auto &f : fields_of(e, t))
      vs.push_back(val_unflatten(e, f, slice(bs, 0, bit_size_of(e, f))));
    return v_union_all(t.tag, std::move(vs));
  }
  }
  throw error("val_unflatten: bad type");
}

inline val val_new(const env &e, const type &t) {
  return val_unflatten(e, t, std::vector<bit>(bit_size_of(e, t), bit_indet()));
}

inline bool val_typed(const env &e, const mem_env &d, const val &v, const type &t) {
  switch (v.k) {
  case val::kind::base:
    return t.is_base() && base_val_typed(e, d, v.b, t.base);
  case val::kind::array:
    if (!t.is_array() || t.n != v.children.size() || t.n == 0 || !(t.element() == v.elem))
      return false;
    for (const auto &c : v.children)
      if (!val_typed(e, d, c, v.elem))
        return false;
    return true;
  case val::kind::struct_: {
    if (!t.is_struct() || t.tag != v.tag || !e.types.fields(t.tag))
      return false;
    const auto &fs = fields_of(e, t);
    if (fs.size() != v.children.size())
      return false;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (!val_typed(e, d, v.children[i], fs[i]))
        return false;
    return true;
  }
  case val::kind::union_: {
    if (!t.is_union() || t.tag != v.tag || !e.types.fields(t.tag))
      return false;
    const auto &fs = fields_of(e, t);
    return v.variant < fs.size() && v.children.size() == 1 &&
           val_typed(e, d, v.children[0], fs[v.variant]);
  }
  case val::kind::union_all: {
    if (!t.is_union() || t.tag != v.tag || !e.types.fields(t.tag))
      return false;
    const auto &fs = fields_of(e, t);
    if (fs.size() != v.children.size())
      return false;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (!val_typed(e, d, v.children[i], fs[i]))
        return false;
    // The readings must come from one common bit sequence; the join of their
    // padded flattenings is the least candidate.
    auto bs = val_flatten_opt(e, v);
    if (!bs)
      return false;
    for (const auto &b : *bs)
      if (!bit_valid(e, d, b))
        return false;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (!(val_unflatten(e, fs[i], slice(*bs, 0, bit_size_of(e, fs[i]))) == v.children[i]))
        return false;
    return true;
  }
  }
  return false;
}

inline val freeze(val v) {
  if (v.k == val::kind::base) {
    if (v.b.k == base_val::kind::pointer)
      v.b.p = freeze(std::move(v.b.p));
    return v;
  }
  for (auto &c : v.children)
    c = freeze(std::move(c));
  return v;
}

inline mtree of_val(const env &e, const std::vector<perm> &gs, const val &v) {
  switch (v.k) {
  case val::kind::base:
    return tree_base(type_of(v.b), zip_pbits(gs, base_flatten(e, v.b)));
  case val::kind::array: {
    std::size_t s = bit_size_of(e, v.elem);
    std::vector<mtree> ws;
    for (std::size_t j = 0; j < v.children.size(); ++j)
      ws.push_back(of_val(e, slice(gs, j * s, (j + 1) * s), v.children[j]));
    return tree_array(v.elem, std::move(ws));
  }
  case val::kind::struct_: {
    type t = struct_t(v.tag);
    const auto &fs = fields_of(e, t);
    auto sizes = field_bit_sizes(e, t);
    std::vector<mtree> ws;
    std::vector<std::vector<pbit>> pads;
    std::size_t z = 0;
    for (std::size_t i = 0; i < v.children.size(); ++i) {
      std::size_t s = bit_size_of(e, fs[i]);
      ws.push_back(of_val(e, slice(gs, z, z + s), v.children[i]));
      auto pg = slice(gs, z + s, z + sizes[i]);
      pads.push_back(zip_pbits(pg, std::vector<bit>(pg.size(), bit_indet())));
      z += sizes[i];
    }
    return tree_struct(v.tag, std::move(ws), std::move(pads));
  }
  case val::kind::union_: {
    std::size_t s = bit_size_of(e, type_of(v.children[0]));
    auto pg = slice(gs, s, gs.size());
    return tree_union(v.tag, v.variant, of_val(e, slice(gs, 0, s), v.children[0]),
                      zip_pbits(pg, std::vector<bit>(pg.size(), bit_indet())));
  }
  case val::kind::union_all:
    return tree_union_all(v.tag, zip_pbits(gs, val_flatten(e, v)));
  }
  throw error("of_val: bad value");
}

inline val to_val(const env &e, const mtree &w) {
  switch (w.k) {
  case mtree::kind::base:
    return v_base(base_unflatten(e, w.bt, bits_of(w.bits)));
  case mtree::kind::array: {
    std::vector<val> vs;
    for (const auto &c : w.children)
      vs.push_back(to_val(e, c));
    return v_array(w.elem, std::move(vs));
  }
  case mtree::kind::struct_: {
    std::vector<val> vs;
    for (const auto &c : w.children)
      vs.push_back(to_val(e, c));
    return v_struct(w.tag, std::move(vs));
  }
  case mtree::kind::union_:
    return v_union(w.tag, w.variant, to_val(e, w.children[0]));
  case mtree::kind::union_all:
    return val_unflatten(e, union_t(w.tag), bits_of(w.bits));
  }
  throw error("to_val: bad tree");
}

} // namespace ch2o
