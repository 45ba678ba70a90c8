// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/ctypes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ch2o {

using object_id = std::uint64_t;

// One step from an object to a subobject: an array element, a struct field,
// or a union variant. Union steps carry a frozen flag; an unfrozen step may
// reinterpret the bits of another variant.
struct ref_seg {
  enum class kind { array, struct_, union_ };
  kind k = kind::array;
  std::size_t i = 0;
  type elem{};      // array: element type
  std::size_t n = 0; // array: length
  std::string tag;  // struct and union
  bool frozen = false;

  friend bool operator==(const ref_seg &a, const ref_seg &b) {
    if (a.k != b.k || a.i != b.i)
      return false;
    if (a.k == kind::array)
      return a.n == b.n && a.elem == b.elem;
    return a.tag == b.tag && (a.k != kind::union_ || a.frozen == b.frozen);
  }
};

// References are stored outermost step first.
using ref = std::vector<ref_seg>;

inline ref_seg seg_array(std::size_t i, type elem, std::size_t n) {
  return {ref_seg::kind::array, i, std::move(elem), n, {}, false};
}
inline ref_seg seg_struct(std::size_t i, std::string tag) {
  return {ref_seg::kind::struct_, i, {}, 0, std::move(tag), false};
}
inline ref_seg seg_union(std::size_t i, std::string tag, bool frozen) {
  return {ref_seg::kind::union_, i, {}, 0, std::move(tag), frozen};
}

inline std::string to_string(const ref_seg &s) {
  switch (s.k) {
  case ref_seg::kind::array:
    return "[" + std::to_string(s.i) + "/" + std::to_string(s.n) + "]";
  case ref_seg::kind::struct_:
    return "." + s.tag + "#" + std::to_string(s.i);
  case ref_seg::kind::union_:
    return "<" + s.tag + "#" + std::to_string(s.i) + (s.frozen ? "!" : "?") + ">";
  }
  return "?";
}

inline std::string to_string(const ref &r) {
  std::string out;
  for (const auto &s : r)
    out += to_string(s);
  return out;
}

inline ref_seg freeze(ref_seg s) {
  if (s.k == ref_seg::kind::union_)
    s.frozen = true;
  return s;
}

inline ref freeze(ref r) {
  for (auto &s : r)
    s = freeze(s);
  return r;
}

inline bool is_frozen(const ref &r) {
  for (const auto &s : r)
    if (s.k == ref_seg::kind::union_ && !s.frozen)
      return false;
  return true;
}

// The type of the subobject that the step s selects in an object of type t.
inline std::optional<type> ref_seg_typed(const env &e, const ref_seg &s,
                                         const type &t) {
  switch (s.k) {
  case ref_seg::kind::array:
    if (t.is_array() && t.n == s.n && t.element() == s.elem && s.i < s.n)
      return s.elem;
    return std::nullopt;
  case ref_seg::kind::struct_:
  case ref_seg::kind::union_: {
    bool want_union = s.k == ref_seg::kind::union_;
    if (t.is_base() || t.is_array() || t.is_union() != want_union || t.tag != s.tag)
      return std::nullopt;
    const auto *fs = e.types.fields(t.tag);
    if (!fs || s.i >= fs->size())
      return std::nullopt;
    return (*fs)[s.i];
  }
  }
  return std::nullopt;
}

inline std::optional<type> ref_typed(const env &e, const ref &r, type t) {
  for (const auto &s : r) {
    auto next = ref_seg_typed(e, s, t);
    if (!next)
      return std::nullopt;
    t = std::move(*next);
  }
  return t;
}

inline std::size_t ref_offset(const ref &r) {
  return !r.empty() && r.back().k == ref_seg::kind::array ? r.back().i : 0;
}

inline std::size_t ref_size(const ref &r) {
  return !r.empty() && r.back().k == ref_seg::kind::array ? r.back().n : 1;
}

inline ref ref_set_offset(std::size_t j, ref r) {
  if (!r.empty() && r.back().k == ref_seg::kind::array)
    r.back().i = j;
  return r;
}

inline bool ref_disjoint(const ref &r1, const ref &r2) {
  std::size_t k = 0;
  while (k < r1.size() && k < r2.size() && freeze(r1[k]) == freeze(r2[k]))
    ++k;
  if (k == r1.size() || k == r2.size())
    return false;
  const ref_seg &a = r1[k], &b = r2[k];
  if (a.k == ref_seg::kind::array && b.k == ref_seg::kind::array)
    return a.n == b.n && a.elem == b.elem && a.i != b.i;
  if (a.k == ref_seg::kind::struct_ && b.k == ref_seg::kind::struct_)
    return a.tag == b.tag && a.i != b.i;
  return false;
}

// The memory environment: the type of each object and whether it has been
// deallocated.
struct mem_env_entry {
  type t;
  bool dead = false;
};
using mem_env = std::map<object_id, mem_env_entry>;

inline const type *index_typed(const mem_env &d, object_id o) {
  auto it = d.find(o);
  return it == d.end() ? nullptr : &it->second.t;
}

inline bool index_alive(const mem_env &d, object_id o) {
  auto it = d.find(o);
  return it != d.end() && !it->second.dead;
}

// An address: object, its type, a reference to a subobject of type `sub`, a
// byte offset into the array that contains that subobject, and the type the
// pointer has been cast to.
struct addr {
  object_id index = 0;
  type obj{};
  ref r;
  std::size_t byte = 0;
  type sub{};
  ptr_type cast{};

  friend bool operator==(const addr &a, const addr &b) {
    return a.index == b.index && a.obj == b.obj && a.r == b.r && a.byte == b.byte &&
           a.sub == b.sub && a.cast == b.cast;
  }
};

inline std::string to_string(const addr &a) {
  return "(" + std::to_string(a.index) + ", " + to_string(a.obj) + ", " +
         to_string(a.r) + ", " + std::to_string(a.byte) + ", " + to_string(a.sub) +
         ", " + to_string(a.cast) + "*)";
}

inline bool castable(const type &sub, const ptr_type &p) {
  if (p.k == ptr_type::kind::any)
    return true;
  if (p.k != ptr_type::kind::to)
    return false;
  return *p.target == sub || *p.target == uchar_t();
}

inline bool addr_typed(const env &e, const mem_env &d, const addr &a) {
  const type *t = index_typed(d, a.index);
  if (!t || !(*t == a.obj) || !type_valid(e.types, a.obj))
    return false;
  auto sub = ref_typed(e, a.r, a.obj);
  if (!sub || !(*sub == a.sub) || ref_offset(a.r) != 0)
    return false;
  if (a.byte > size_of(e, a.sub) * ref_size(a.r))
    return false;
  std::size_t step = ptr_target_size(e, a.cast);
  return step != 0 && a.byte % step == 0 && castable(a.sub, a.cast);
}

inline bool addr_strict(const env &e, const addr &a) {
  return a.byte < size_of(e, a.sub) * ref_size(a.r);
}

inline bool addr_is_byte(const addr &a) {
  return !(a.cast.k == ptr_type::kind::to && *a.cast.target == a.sub);
}

inline bool addr_frozen(const addr &a) { return is_frozen(a.r); }

inline addr freeze(addr a) {
  a.r = freeze(std::move(a.r));
  return a;
}

// The reference to the array element the byte offset points into.
inline ref addr_ref(const env &e, const addr &a) {
  return ref_set_offset(a.byte / size_of(e, a.sub), a.r);
}

inline std::size_t addr_ref_byte(const env &e, const addr &a) {
  return a.byte % size_of(e, a.sub);
}

inline bool addr_disjoint(const env &e, const addr &a1, const addr &a2) {
  if (a1.index != a2.index)
    return true;
  ref r1 = addr_ref(e, a1), r2 = addr_ref(e, a2);
  if (ref_disjoint(r1, r2))
    return true;
  return addr_is_byte(a1) && addr_is_byte(a2) && freeze(r1) == freeze(r2) &&
         addr_ref_byte(e, a1) != addr_ref_byte(e, a2);
}

inline std::size_t ref_seg_bit_offset(const env &e, const ref_seg &s) {
  switch (s.k) {
  case ref_seg::kind::array:
    return s.i * bit_size_of(e, s.elem);
  case ref_seg::kind::union_:
    return 0;
  case ref_seg::kind::struct_:
    return field_bit_offset(e, struct_t(s.tag), s.i);
  }
  return 0;
}

// Bit offset of the address within its object.
inline std::size_t addr_object_offset(const env &e, const addr &a) {
  std::size_t off = 0;
  for (const auto &s : addr_ref(e, a))
    off += ref_seg_bit_offset(e, s);
  return off + addr_ref_byte(e, a) * e.impl.char_bits;
}

// Pointers: null pointers of a given type, addresses, and function pointers.
struct ptr {
  enum class kind { null, address, function };
  kind k = kind::null;
  ptr_type null_type{};
  addr a{};
  std::string fn;
  ptr_type fn_type{};

  friend bool operator==(const ptr &x, const ptr &y) {
    if (x.k != y.k)
      return false;
    switch (x.k) {
    case kind::null:
      return x.null_type == y.null_type;
    case kind::address:
      return x.a == y.a;
    case kind::function:
      return x.fn == y.fn && x.fn_type == y.fn_type;
    }
    return false;
  }
};

inline ptr null_ptr(ptr_type t) {
  ptr p;
  p.null_type = std::move(t);
  return p;
}
inline ptr addr_ptr(addr a) {
  ptr p;
  p.k = ptr::kind::address;
  p.a = std::move(a);
  return p;
}
inline ptr fun_ptr(std::string name, const std::vector<type> &args, type ret) {
  ptr p;
  p.k = ptr::kind::function;
  p.fn = std::move(name);
  p.fn_type = ptr_fun(args, std::move(ret));
  return p;
}

inline ptr_type type_of(const ptr &p) {
  switch (p.k) {
  case ptr::kind::null:
    return p.null_type;
  case ptr::kind::address:
    return p.a.cast;
  case ptr::kind::function:
    return p.fn_type;
  }
  return {};
}

inline std::string to_string(const ptr &p) {
  switch (p.k) {
  case ptr::kind::null:
    return "NULL(" + to_string(p.null_type) + "*)";
  case ptr::kind::address:
    return "&" + to_string(p.a);
  case ptr::kind::function:
    return "&" + p.fn;
  }
  return "?";
}

inline bool ptr_typed(const env &e, const mem_env &d, const ptr &p) {
  switch (p.k) {
  case ptr::kind::null:
    return ptr_type_valid(e.types, p.null_type);
  case ptr::kind::address:
    return addr_typed(e, d, p.a);
  case ptr::kind::function: {
    auto it = e.types.functions.find(p.fn);
    if (it == e.types.functions.end())
      return false;
    return ptr_fun(it->second.first, it->second.second) == p.fn_type;
  }
  }
  return false;
}

inline bool ptr_frozen(const ptr &p) {
  return p.k != ptr::kind::address || addr_frozen(p.a);
}

inline ptr freeze(ptr p) {
  if (p.k == ptr::kind::address)
    p.a = freeze(std::move(p.a));
  return p;
}

inline bool ptr_alive(const mem_env &d, const ptr &p) {
  return p.k != ptr::kind::address || index_alive(d, p.a.index);
}

} // namespace ch2o
