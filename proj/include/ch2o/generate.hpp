// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/memsep.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ch2o {

inline const int_type short_int{signedness::is_signed, int_rank::short_rank};

// The type environment shared by the generators and suites:
//   union U { int x; short y; };
//   struct S { signed char c; union U u; short s; int *p; };
//   struct T { short a[3]; struct S s; };
//   struct P { short x; short *p; };
//   int f(int);
inline env fixture_env(const impl_env &ie = {}) {
  env e;
  e.set_impl(ie);
  type i = int_t(sint_int), s = int_t(short_int);
  e.declare("U", {i, s});
  e.declare("S", {int_t(schar_int), union_t("U"), s, ptr_t(ptr_to(i))});
  e.declare("T", {array_t(s, 3), struct_t("S")});
  e.declare("P", {s, ptr_t(ptr_to(s))});
  e.declare_function("f", {i}, i);
  return e;
}

inline std::vector<type> fixture_object_types() {
  type i = int_t(sint_int), s = int_t(short_int);
  return {i,           s,
          union_t("U"), struct_t("S"),
          struct_t("T"), struct_t("P"),
          array_t(s, 3), array_t(union_t("U"), 2),
          ptr_t(ptr_to(i)), ptr_t(ptr_fun({i}, i))};
}

// Deterministic choices from a seeded 64-bit Mersenne twister. Every draw
// takes the raw output modulo the range so that results do not depend on the
// standard library's distribution implementations.
struct rng {
  std::mt19937_64 g;
  explicit rng(std::uint64_t seed) : g(seed) {}
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(g() % n); }
  bool chance(std::size_t num, std::size_t den) { return below(den) < num; }
  template <class T> const T &pick(const std::vector<T> &xs) { return xs[below(xs.size())]; }
};

// Every reference into an object of type t together with the subobject type
// it selects. Union steps are emitted frozen, and also unfrozen when asked.
inline std::vector<std::pair<ref, type>> enumerate_refs(const env &e, const type &t,
                                                        bool unfrozen_too) {
  std::vector<std::pair<ref, type>> out{{{}, t}};
  std::vector<std::pair<ref_seg, type>> steps;
  if (t.is_array()) {
    for (std::size_t j = 0; j < t.n; ++j)
      steps.push_back({seg_array(j, t.element(), t.n), t.element()});
  } else if (t.is_struct() || t.is_union()) {
    const auto &fs = fields_of(e, t);
    for (std::size_t j = 0; j < fs.size(); ++j) {
      if (t.is_struct()) {
        steps.push_back({seg_struct(j, t.tag), fs[j]});
        continue;
      }
      steps.push_back({seg_union(j, t.tag, true), fs[j]});
      if (unfrozen_too)
        steps.push_back({seg_union(j, t.tag, false), fs[j]});
    }
  }
  for (const auto &[s, u] : steps)
    for (auto [r, v] : enumerate_refs(e, u, unfrozen_too)) {
      r.insert(r.begin(), s);
      out.push_back({std::move(r), std::move(v)});
    }
  return out;
}

struct addr_options {
  bool unfrozen = true;
  bool bytes = true;
  bool end = true;
};

// Every typed address into object o of type t, subject to the options.
inline std::vector<addr> enumerate_addrs(const env &e, object_id o, const type &t,
                                         const addr_options &opt = {}) {
  std::vector<addr> out;
  for (const auto &[r, sub] : enumerate_refs(e, t, opt.unfrozen)) {
    if (ref_offset(r) != 0)
      continue;
    std::size_t sz = size_of(e, sub), n = ref_size(r);
    for (std::size_t j = 0; j < n + (opt.end ? 1 : 0); ++j)
      out.push_back({o, t, r, j * sz, sub, ptr_to(sub)});
    if (opt.bytes && !(sub == uchar_t()))
      for (std::size_t b = 0; b < sz * n + (opt.end ? 1 : 0); ++b)
        out.push_back({o, t, r, b, sub, ptr_to(uchar_t())});
  }
  return out;
}

inline std::vector<addr> enumerate_addrs(const env &e, const mem_env &d,
                                         const addr_options &opt = {}) {
  std::vector<addr> out;
  for (const auto &[o, entry] : d) {
    auto xs = enumerate_addrs(e, o, entry.t, opt);
    out.insert(out.end(), xs.begin(), xs.end());
  }
  return out;
}

// Whether sub is a subobject type of t.
inline bool subtype(const env &e, const type &sub, const type &t) {
  for (const auto &[r, u] : enumerate_refs(e, t, false))
    if (u == sub)
      return true;
  return false;
}

struct generator {
  const env &e;
  rng r;

  generator(const env &e_, std::uint64_t seed) : e(e_), r(seed) {}

  integer int_value(const int_type &it) {
    std::vector<bool> bs(int_bits(e.impl, it));
    if (r.chance(1, 2)) {
      std::uint64_t x = r.below(8);
      for (std::size_t i = 0; i < bs.size() && i < 64; ++i)
        bs[i] = (x >> i) & 1;
      return int_of_bits(e.impl, it, endianize(e.impl, bs));
    }
    for (std::size_t i = 0; i < bs.size(); ++i)
      bs[i] = r.chance(1, 2);
    return int_of_bits(e.impl, it, bs);
  }

  std::optional<ptr> pointer_value(const mem_env &d, const ptr_type &pt) {
    if (pt.k == ptr_type::kind::fun) {
      for (const auto &[name, sig] : e.types.functions)
        if (ptr_fun(sig.first, sig.second) == pt)
          return fun_ptr(name, sig.first, sig.second);
      return std::nullopt;
    }
    std::vector<addr> cands;
    for (const auto &a : enumerate_addrs(e, d, {true, false, true}))
      if (a.cast == pt)
        cands.push_back(a);
    if (cands.empty())
      return std::nullopt;
    return addr_ptr(r.pick(cands));
  }

  base_val base_value(const mem_env &d, const base_type &bt) {
    if (bt.k == base_type::kind::void_)
      return bv_void();
    if (r.chance(1, 8))
      return bv_indet(bt);
    if (bt.k == base_type::kind::integer) {
      if (bt.it == uchar_int && r.chance(1, 6)) {
        std::vector<bit> bs(e.impl.char_bits);
        for (auto &b : bs)
          b = r.chance(1, 2) ? bit_indet() : bit_of(r.chance(1, 2));
        bs[0] = bit_indet();
        bs[1] = bit_of(true);
        return bv_byte(bs);
      }
      return bv_int(bt.it, int_value(bt.it));
    }
    if (r.chance(1, 4))
      return bv_ptr(null_ptr(*bt.ptr));
    auto p = pointer_value(d, *bt.ptr);
    return p ? bv_ptr(*p) : bv_ptr(null_ptr(*bt.ptr));
  }

  val value(const mem_env &d, const type &t) {
    switch (t.k) {
    case type::kind::base:
      return v_base(base_value(d, t.base));
    case type::kind::array: {
      std::vector<val> vs;
      for (std::size_t j = 0; j < t.n; ++j)
        vs.push_back(value(d, t.element()));
      return v_array(t.element(), std::move(vs));
    }
    case type::kind::struct_: {
      std::vector<val> vs;
      for (const auto &f : fields_of(e, t))
        vs.push_back(value(d, f));
      return v_struct(t.tag, std::move(vs));
    }
    case type::kind::union_: {
      const auto &fs = fields_of(e, t);
      std::size_t i = r.below(fs.size());
      val v = v_union(t.tag, i, value(d, fs[i]));
      if (r.chance(1, 4))
        return val_unflatten(e, t, pad_indet(val_flatten(e, v), bit_size_of(e, t)));
      return v;
    }
    }
    throw error("generator: bad type");
  }

  // A valid memory with up to n objects: allocation, initialization,
  // reinterpretation through unions, partial permissions and deallocation.
  mem memory(std::size_t n, bool ops = true) {
    const auto types = fixture_object_types();
    mem m;
    std::size_t k = 1 + r.below(n);
    for (std::size_t i = 0; i < k; ++i) {
      type t = r.pick(types);
      m = mem_alloc(e, fresh_index(m), val_new(e, t), r.chance(1, 3), m);
    }
    mem_env d = mem_env_of(m);
    for (const auto &[o, entry] : d) {
      if (r.chance(1, 6))
        continue;
      addr a{o, entry.t, {}, 0, entry.t, ptr_to(entry.t)};
      if (auto m2 = mem_insert(e, a, value(d, entry.t), m))
        m = *m2;
    }
    if (!ops)
      return m;
    auto addrs = enumerate_addrs(e, d, {true, true, false});
    std::size_t steps = r.below(4);
    for (std::size_t i = 0; i < steps && !addrs.empty(); ++i) {
      const addr &a = r.pick(addrs);
      switch (r.below(3)) {
      case 0:
        if (auto m2 = mem_force(e, a, m))
          m = *m2;
        break;
      default:
        if (auto m2 = mem_insert(e, a, value(d, a.cast.k == ptr_type::kind::to ? *a.cast.target : a.sub), m))
          m = *m2;
        break;
      }
    }
    for (auto &[o, c] : m.cells) {
      auto *l = std::get_if<live_object>(&c);
      if (l && r.chance(1, 5))
        l->tree = tree_map([](const pbit &x) { return make_pbit(perm_half(x.value), x.tag); },
                           l->tree);
    }
    if (m.cells.size() > 1 && r.chance(1, 5)) {
      auto it = m.cells.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(r.below(m.cells.size())));
      m = mem_free(it->first, m);
    }
    return m;
  }
};

namespace detail {

// Rebuilds the unions of w whose bits became unmapped as unknown-variant
// unions, bottom up.
inline mtree normalize_tree(mtree w) {
  for (auto &c : w.children)
    c = normalize_tree(std::move(c));
  return normalize_union(std::move(w));
}

} // namespace detail

// Splits m into two disjoint parts whose union is m. Each object goes wholly
// to one side, is halved, or is split bit by bit.
inline std::pair<mem, mem> split_mem(rng &r, const mem &m) {
  mem a, b;
  for (const auto &[o, c] : m.cells) {
    const auto *l = std::get_if<live_object>(&c);
    if (!l) {
      (r.chance(1, 2) ? a : b).cells.emplace(o, c);
      continue;
    }
    auto xs = tree_flatten(l->tree);
    std::vector<pbit> ys, zs;
    std::size_t mode = r.below(4);
    const pbit none = pbit_algebra.empty();
    for (const auto &x : xs) {
      std::size_t k = mode == 3 ? r.below(3) : mode;
      if (k == 2 && !pbit_algebra.splittable(x))
        k = 0;
      if (k == 0) {
        ys.push_back(x);
        zs.push_back(none);
      } else if (k == 1) {
        ys.push_back(none);
        zs.push_back(x);
      } else {
        ys.push_back(pbit_algebra.half(x));
        zs.push_back(pbit_algebra.half(x));
      }
    }
    auto part = [&](const std::vector<pbit> &ps) {
      std::size_t pos = 0;
      return detail::normalize_tree(tree_merge(
          [&](const pbit &x, char) {
            (void)x;
            return ps[pos++];
          },
          l->tree, std::vector<char>(ps.size())));
    };
    mtree w1 = part(ys), w2 = part(zs);
    if (!all_empty_indet(w1))
      a.cells.emplace(o, live_object{w1, l->malloced});
    if (!all_empty_indet(w2))
      b.cells.emplace(o, live_object{w2, l->malloced});
  }
  return {a, b};
}

} // namespace ch2o
