// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ch2o {

using integer = boost::multiprecision::cpp_int;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class signedness { is_signed, is_unsigned };
enum class int_rank { char_rank, short_rank, int_rank, long_rank, long_long_rank };

struct int_type {
  signedness sign = signedness::is_signed;
  int_rank rank = int_rank::int_rank;
  friend bool operator==(const int_type &, const int_type &) = default;
};

inline const int_type uchar_int{signedness::is_unsigned, int_rank::char_rank};
inline const int_type schar_int{signedness::is_signed, int_rank::char_rank};
inline const int_type sint_int{signedness::is_signed, int_rank::int_rank};

struct type;

// Types a pointer may point to: an object type, `void*`, or a function.
struct ptr_type {
  enum class kind { to, any, fun };
  kind k = kind::any;
  std::shared_ptr<const type> target;
  std::vector<std::shared_ptr<const type>> args;
  std::shared_ptr<const type> ret;
};

struct base_type {
  enum class kind { integer, pointer, void_ };
  kind k = kind::void_;
  int_type it{};
  std::shared_ptr<const ptr_type> ptr;
};

struct type {
  enum class kind { base, array, struct_, union_ };
  kind k = kind::base;
  base_type base{};
  std::shared_ptr<const type> elem;
  std::size_t n = 0;
  std::string tag;

  bool is_base() const { return k == kind::base; }
  bool is_array() const { return k == kind::array; }
  bool is_struct() const { return k == kind::struct_; }
  bool is_union() const { return k == kind::union_; }
  const type &element() const { return *elem; }
  const ptr_type &pointee() const { return *base.ptr; }
};

bool operator==(const type &a, const type &b);

inline bool operator==(const ptr_type &a, const ptr_type &b) {
  if (a.k != b.k)
    return false;
  switch (a.k) {
  case ptr_type::kind::any:
    return true;
  case ptr_type::kind::to:
    return *a.target == *b.target;
  case ptr_type::kind::fun:
    if (a.args.size() != b.args.size() || !(*a.ret == *b.ret))
      return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
      if (!(*a.args[i] == *b.args[i]))
        return false;
    return true;
  }
  return false;
}

inline bool operator==(const base_type &a, const base_type &b) {
  if (a.k != b.k)
    return false;
  if (a.k == base_type::kind::integer)
    return a.it == b.it;
  if (a.k == base_type::kind::pointer)
    return *a.ptr == *b.ptr;
  return true;
}

inline bool operator==(const type &a, const type &b) {
  if (a.k != b.k)
    return false;
  switch (a.k) {
  case type::kind::base:
    return a.base == b.base;
  case type::kind::array:
    return a.n == b.n && *a.elem == *b.elem;
  default:
    return a.tag == b.tag;
  }
}

inline base_type int_base(int_type it) {
  return {base_type::kind::integer, it, nullptr};
}
inline base_type ptr_base(ptr_type p) {
  return {base_type::kind::pointer, {}, std::make_shared<const ptr_type>(std::move(p))};
}
inline base_type void_base() { return {}; }

inline type base_t(base_type b) {
  type t;
  t.base = std::move(b);
  return t;
}
inline type int_t(int_type it) { return base_t(int_base(it)); }
inline type uchar_t() { return int_t(uchar_int); }
inline type ptr_t(ptr_type p) { return base_t(ptr_base(std::move(p))); }
inline type void_t() { return base_t(void_base()); }
inline type array_t(type elem, std::size_t n) {
  type t;
  t.k = type::kind::array;
  t.elem = std::make_shared<const type>(std::move(elem));
  t.n = n;
  return t;
}
inline type struct_t(std::string tag) {
  type t;
  t.k = type::kind::struct_;
  t.tag = std::move(tag);
  return t;
}
inline type union_t(std::string tag) {
  type t;
  t.k = type::kind::union_;
  t.tag = std::move(tag);
  return t;
}

inline ptr_type ptr_to(type t) {
  ptr_type p;
  p.k = ptr_type::kind::to;
  p.target = std::make_shared<const type>(std::move(t));
  return p;
}
inline ptr_type ptr_any() { return {}; }
inline ptr_type ptr_fun(const std::vector<type> &args, type ret) {
  ptr_type p;
  p.k = ptr_type::kind::fun;
  for (const auto &a : args)
    p.args.push_back(std::make_shared<const type>(a));
  p.ret = std::make_shared<const type>(std::move(ret));
  return p;
}

inline const char *to_string(int_rank r) {
  switch (r) {
  case int_rank::char_rank:
    return "char";
  case int_rank::short_rank:
    return "short";
  case int_rank::int_rank:
    return "int";
  case int_rank::long_rank:
    return "long";
  case int_rank::long_long_rank:
    return "long long";
  }
  return "?";
}

inline std::string to_string(const int_type &it) {
  return std::string(it.sign == signedness::is_signed ? "signed " : "unsigned ") +
         to_string(it.rank);
}

std::string to_string(const type &t);

inline std::string to_string(const ptr_type &p) {
  switch (p.k) {
  case ptr_type::kind::any:
    return "void";
  case ptr_type::kind::to:
    if (p.target->is_base() && p.target->base.k == base_type::kind::void_)
      return "(void)";
    return to_string(*p.target);
  case ptr_type::kind::fun: {
    std::string s = "(fn(";
    for (std::size_t i = 0; i < p.args.size(); ++i)
      s += (i ? "," : "") + to_string(*p.args[i]);
    return s + ")->" + to_string(*p.ret) + ")";
  }
  }
  return "?";
}

inline std::string to_string(const base_type &b) {
  switch (b.k) {
  case base_type::kind::integer:
    return to_string(b.it);
  case base_type::kind::pointer:
    return to_string(*b.ptr) + "*";
  case base_type::kind::void_:
    return "void";
  }
  return "?";
}

// Postfix rendering: `int[4]*` is a pointer to an array, `int*[4]` an array
// of pointers.
inline std::string to_string(const type &t) {
  switch (t.k) {
  case type::kind::base:
    return to_string(t.base);
  case type::kind::array:
    return to_string(*t.elem) + "[" + std::to_string(t.n) + "]";
  case type::kind::struct_:
    return "struct " + t.tag;
  case type::kind::union_:
    return "union " + t.tag;
  }
  return "?";
}

// Maps struct/union tags to their field types and function names to their
// signatures.
struct type_env {
  std::map<std::string, std::vector<type>> compounds;
  std::map<std::string, std::pair<std::vector<type>, type>> functions;

  const std::vector<type> *fields(const std::string &tag) const {
    auto it = compounds.find(tag);
    return it == compounds.end() ? nullptr : &it->second;
  }
};

enum class endianness { little, big };

// Implementation-defined parameters. The defaults are the test environment:
// 8-bit signed chars, 1/2/4/4/8 byte integers, 4-byte pointers, alignment
// equal to size.
struct impl_env {
  std::size_t char_bits = 8;
  bool char_signed = true;
  std::size_t rank_sizes[5] = {1, 2, 4, 4, 8};
  std::size_t ptr_size = 4;
  std::size_t void_size = 1;
  endianness endian = endianness::little;

  std::size_t rank_size(int_rank r) const {
    return rank_sizes[static_cast<int>(r)];
  }
  int_type char_int() const {
    return {char_signed ? signedness::is_signed : signedness::is_unsigned,
            int_rank::char_rank};
  }
};

struct compound_layout {
  std::size_t size = 0;
  std::size_t align = 1;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> field_sizes;
};

// The type environment and implementation parameters that every layout
// dependent operation needs. Compound layouts are cached per tag.
struct env {
  type_env types;
  impl_env impl;

  void declare(const std::string &tag, std::vector<type> fields) {
    types.compounds[tag] = std::move(fields);
    cache.clear();
  }
  void declare_function(const std::string &name, std::vector<type> args, type ret) {
    types.functions[name] = {std::move(args), std::move(ret)};
  }
  void set_impl(const impl_env &ie) {
    impl = ie;
    cache.clear();
  }

  mutable std::map<std::pair<std::string, bool>, compound_layout> cache;
};

// Validity judgments.

bool type_valid(const type_env &g, const type &t);

inline bool base_type_valid(const type_env &g, const base_type &b);

inline bool ptr_type_valid(const type_env &g, const ptr_type &p) {
  switch (p.k) {
  case ptr_type::kind::any:
    return true;
  case ptr_type::kind::fun:
    for (const auto &a : p.args)
      if (!ptr_type_valid(g, ptr_to(*a)))
        return false;
    return ptr_type_valid(g, ptr_to(*p.ret));
  case ptr_type::kind::to: {
    const type &t = *p.target;
    if (t.is_base())
      return base_type_valid(g, t.base);
    if (t.is_array())
      return t.n != 0 && type_valid(g, *t.elem);
    return true;
  }
  }
  return false;
}

inline bool base_type_valid(const type_env &g, const base_type &b) {
  if (b.k == base_type::kind::pointer)
    return ptr_type_valid(g, *b.ptr);
  return true;
}

inline bool type_valid(const type_env &g, const type &t) {
  switch (t.k) {
  case type::kind::base:
    return base_type_valid(g, t.base);
  case type::kind::array:
    return t.n != 0 && type_valid(g, *t.elem);
  default:
    return g.fields(t.tag) != nullptr;
  }
}

// An environment is valid when its compounds can be inserted one by one, each
// valid in the environment built so far. The insertion order is found by
// repeatedly adding every compound whose fields are already valid.
inline bool env_valid(const type_env &g) {
  type_env built;
  std::set<std::string> pending;
  for (const auto &[tag, fs] : g.compounds) {
    if (fs.empty())
      return false;
    pending.insert(tag);
  }
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const auto &fs = g.compounds.at(*it);
      bool ok = std::all_of(fs.begin(), fs.end(),
                            [&](const type &t) { return type_valid(built, t); });
      if (ok) {
        built.compounds[*it] = fs;
        it = pending.erase(it);
        progress = true;
      } else {
        ++it;
      }
    }
  }
  if (!pending.empty())
    return false;
  for (const auto &[name, sig] : g.functions) {
    for (const auto &a : sig.first)
      if (!ptr_type_valid(built, ptr_to(a)))
        return false;
    if (!ptr_type_valid(built, ptr_to(sig.second)))
      return false;
  }
  return true;
}

// Layout.

namespace detail {

inline std::size_t round_up(std::size_t x, std::size_t a) {
  return a == 0 ? x : (x + a - 1) / a * a;
}

struct layout_guard {
  std::vector<std::string> expanding;
};

compound_layout compute_layout(const env &e, const std::string &tag, bool is_union,
                               layout_guard &guard);

inline std::pair<std::size_t, std::size_t> size_align(const env &e, const type &t,
                                                      layout_guard &guard) {
  const impl_env &ie = e.impl;
  switch (t.k) {
  case type::kind::base:
    switch (t.base.k) {
    case base_type::kind::integer: {
      std::size_t s = ie.rank_size(t.base.it.rank);
      return {s, s};
    }
    case base_type::kind::pointer:
      return {ie.ptr_size, ie.ptr_size};
    case base_type::kind::void_:
      return {ie.void_size, 1};
    }
    break;
  case type::kind::array: {
    auto [s, a] = size_align(e, *t.elem, guard);
    return {s * t.n, a};
  }
  default: {
    auto key = std::make_pair(t.tag, t.is_union());
    auto it = e.cache.find(key);
    if (it == e.cache.end())
      it = e.cache.emplace(key, compute_layout(e, t.tag, t.is_union(), guard)).first;
    return {it->second.size, it->second.align};
  }
  }
  return {0, 1};
}

inline compound_layout compute_layout(const env &e, const std::string &tag,
                                      bool is_union, layout_guard &guard) {
  const auto *fs = e.types.fields(tag);
  if (!fs)
    throw error("unknown compound type '" + tag + "'");
  if (std::find(guard.expanding.begin(), guard.expanding.end(), tag) !=
      guard.expanding.end())
    throw error("compound type '" + tag + "' contains itself");
  guard.expanding.push_back(tag);
  compound_layout l;
  std::vector<std::pair<std::size_t, std::size_t>> sa;
  for (const auto &f : *fs) {
    sa.push_back(size_align(e, f, guard));
    l.align = std::max(l.align, sa.back().second);
  }
  if (is_union) {
    std::size_t m = 0;
    for (const auto &[s, a] : sa) {
      m = std::max(m, s);
      l.offsets.push_back(0);
    }
    l.size = round_up(m, l.align);
    for (const auto &[s, a] : sa)
      l.field_sizes.push_back(l.size);
  } else {
    std::size_t off = 0;
    for (const auto &[s, a] : sa) {
      off = round_up(off, a);
      l.offsets.push_back(off);
      off += s;
    }
    l.size = round_up(off, l.align);
    for (std::size_t i = 0; i < sa.size(); ++i) {
      std::size_t next = i + 1 < sa.size() ? l.offsets[i + 1] : l.size;
      l.field_sizes.push_back(next - l.offsets[i]);
    }
  }
  guard.expanding.pop_back();
  return l;
}

} // namespace detail

inline std::size_t size_of(const env &e, const type &t) {
  detail::layout_guard g;
  return detail::size_align(e, t, g).first;
}

inline std::size_t align_of(const env &e, const type &t) {
  detail::layout_guard g;
  return detail::size_align(e, t, g).second;
}

inline const compound_layout &layout_of(const env &e, const type &t) {
  if (t.is_base() || t.is_array())
    throw error("layout_of: not a compound type: " + to_string(t));
  size_of(e, t);
  return e.cache.at({t.tag, t.is_union()});
}

inline std::size_t bit_size_of(const env &e, const type &t) {
  return size_of(e, t) * e.impl.char_bits;
}

// Bytes (and bits) between the start of field i and the start of field i+1,
// or the end of the struct for the last field.
inline std::vector<std::size_t> field_bit_sizes(const env &e, const type &t) {
  std::vector<std::size_t> out;
  for (auto s : layout_of(e, t).field_sizes)
    out.push_back(s * e.impl.char_bits);
  return out;
}

inline std::size_t field_bit_offset(const env &e, const type &t, std::size_t i) {
  return layout_of(e, t).offsets.at(i) * e.impl.char_bits;
}

inline const std::vector<type> &fields_of(const env &e, const type &t) {
  const auto *fs = e.types.fields(t.tag);
  if (!fs)
    throw error("unknown compound type '" + t.tag + "'");
  return *fs;
}

// Size used for pointer arithmetic on a pointer of type p.
inline std::size_t ptr_target_size(const env &e, const ptr_type &p) {
  if (p.k == ptr_type::kind::to)
    return size_of(e, *p.target);
  return 1;
}

// Integer coding.

inline std::size_t int_bits(const impl_env &ie, const int_type &it) {
  return ie.rank_size(it.rank) * ie.char_bits;
}

inline integer int_min(const impl_env &ie, const int_type &it) {
  if (it.sign == signedness::is_unsigned)
    return 0;
  return -(integer(1) << (int_bits(ie, it) - 1));
}

inline integer int_upper(const impl_env &ie, const int_type &it) {
  std::size_t b = int_bits(ie, it);
  return integer(1) << (it.sign == signedness::is_unsigned ? b : b - 1);
}

inline bool int_typed(const impl_env &ie, const integer &x, const int_type &it) {
  return int_min(ie, it) <= x && x < int_upper(ie, it);
}

// Permutes a least-significant-first bit sequence into memory order. Bytes
// stay least-significant-bit first; big-endian reverses the byte order.
inline std::vector<bool> endianize(const impl_env &ie, std::vector<bool> bs) {
  if (ie.endian == endianness::little)
    return bs;
  std::vector<bool> out;
  std::size_t cb = ie.char_bits, n = bs.size() / cb;
  for (std::size_t k = n; k-- > 0;)
    out.insert(out.end(), bs.begin() + k * cb, bs.begin() + (k + 1) * cb);
  return out;
}

// Byte reversal is its own inverse.
inline std::vector<bool> deendianize(const impl_env &ie, std::vector<bool> bs) {
  return endianize(ie, std::move(bs));
}

inline std::vector<bool> int_to_bits(const impl_env &ie, const int_type &it,
                                     integer x) {
  if (!int_typed(ie, x, it))
    throw error("integer " + x.str() + " out of range of " + to_string(it));
  std::size_t b = int_bits(ie, it);
  if (x < 0)
    x += integer(1) << b;
  std::vector<bool> bs(b);
  for (std::size_t i = 0; i < b; ++i)
    bs[i] = boost::multiprecision::bit_test(x, static_cast<unsigned>(i));
  return endianize(ie, std::move(bs));
}

inline integer int_of_bits(const impl_env &ie, const int_type &it,
                           const std::vector<bool> &bits) {
  std::size_t b = int_bits(ie, it);
  if (bits.size() != b)
    throw error("int_of_bits: expected " + std::to_string(b) + " bits");
  auto bs = deendianize(ie, bits);
  integer x = 0;
  for (std::size_t i = b; i-- > 0;) {
    x <<= 1;
    if (bs[i])
      x += 1;
  }
  if (it.sign == signedness::is_signed && bs[b - 1])
    x -= integer(1) << b;
  return x;
}

} // namespace ch2o
