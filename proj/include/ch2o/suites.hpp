// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/generate.hpp"
#include "ch2o/refine.hpp"
#include "ch2o/render.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ch2o {

// One property checked over many cases. The first failing case is kept.
struct check_result {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string witness;

  void record(bool ok, const std::function<std::string()> &w) {
    ++cases;
    if (!ok) {
      if (failures == 0)
        witness = w();
      ++failures;
    }
  }
  bool ok() const { return failures == 0; }
};

struct report {
  std::string suite;
  std::deque<check_result> checks;

  check_result &add(std::string name) {
    checks.push_back({std::move(name), 0, 0, {}});
    return checks.back();
  }
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const check_result &c) { return c.ok(); });
  }
  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto &c : checks)
      n += c.failures;
    return n;
  }
  const check_result *find(const std::string &name) const {
    for (const auto &c : checks)
      if (c.name == name)
        return &c;
    return nullptr;
  }
  // Plain text, one line per check, free of timings so that equal seeds give
  // equal reports.
  std::string text() const {
    std::ostringstream out;
    for (const auto &c : checks) {
      out << (c.ok() ? "ok   " : "FAIL ") << suite << "/" << c.name << " cases=" << c.cases
          << " failures=" << c.failures << "\n";
      if (!c.ok())
        out << "     first counterexample: " << c.witness << "\n";
    }
    out << suite << ": " << (ok() ? "all properties hold" : "counterexamples found") << "\n";
    return out.str();
  }
};

struct suite_options {
  std::uint64_t seed = 1;
  std::size_t cases = 1000;
};

// Law instances.

inline std::vector<std::string> law_instances() {
  return {"bool", "frac", "counting", "lockable", "tagged", "perm", "tree", "memory"};
}

// Every fraction with denominator at most 4 from -1/2 to 3/2, including the
// invalid ones outside [0, 1].
inline std::vector<rational> frac_carrier() {
  return fraction_grid(rational(-1, 2), rational(3, 2), 4);
}

inline std::vector<counting_sa<frac_sa>::element> counting_carrier() {
  std::vector<counting_sa<frac_sa>::element> out;
  for (const auto &c : quarter_grid(-1, 1))
    for (const auto &f : quarter_grid(0, 1))
      out.push_back({c, f});
  return out;
}

inline std::vector<lockable_sa<counting_sa<frac_sa>>::element> lockable_carrier() {
  std::vector<lockable_sa<counting_sa<frac_sa>>::element> out;
  for (const auto &x : counting_carrier())
    for (bool b : {false, true})
      out.push_back({b, x});
  return out;
}

// Fractions tagged with a bit, as permission-annotated bits are.
inline tagged_sa<frac_sa, bit> tagged_frac_sa() {
  return {frac_sa{}, bit_indet(), [](const bit &b) { return to_string(b); }};
}

inline std::vector<tagged_sa<frac_sa, bit>::element> tagged_carrier() {
  std::vector<tagged_sa<frac_sa, bit>::element> out;
  for (const auto &f : quarter_grid(rational(-1, 4), rational(5, 4)))
    for (const auto &b : {bit_indet(), bit_of(false), bit_of(true)})
      out.push_back({f, b});
  return out;
}

// Small memories related by splitting, so that the sample has many disjoint
// pairs and triples.
inline std::vector<mem> memory_sample(const env &e, rng &r, std::size_t bases) {
  std::vector<mem> out{mem{}};
  generator g(e, r.g());
  for (std::size_t i = 0; i < bases; ++i) {
    mem m = g.memory(2);
    auto [a, b] = split_mem(g.r, m);
    auto [a1, a2] = split_mem(g.r, a);
    auto [b1, b2] = split_mem(g.r, b);
    for (const mem &x : {m, a, b, a1, a2, b1, b2})
      out.push_back(x);
  }
  return out;
}

inline std::vector<mtree> tree_sample(const env &e, rng &r, const type &t, std::size_t bases) {
  std::vector<mtree> out{tree_new(e, t, perm_empty())};
  generator g(e, r.g());
  mem_env d;
  for (std::size_t i = 0; i < bases; ++i) {
    mem m;
    m.cells[1] = live_object{of_val(e, std::vector<perm>(bit_size_of(e, t), perm_full()),
                                    g.value(d, t)),
                             false};
    auto [a, b] = split_mem(g.r, m);
    for (const mem &x : {m, a, b})
      if (const auto *l = x.live(1))
        out.push_back(l->tree);
  }
  return out;
}

template <class S>
void add_laws(report &rep, const std::string &prefix, const S &s,
              const std::vector<typename S::element> &xs, bool extended) {
  for (const auto &l : check_laws(s, xs, extended)) {
    auto &c = rep.add(prefix + " law " + std::to_string(l.law));
    c.cases = l.checked;
    c.failures = l.failures;
    c.witness = l.witness;
  }
}

// The laws of one named instance; an empty name runs all of them.
inline report run_laws(const std::string &instance, const suite_options &opt = {}) {
  report rep{"laws", {}};
  auto want = [&](const char *n) { return instance.empty() || instance == n; };
  if (want("bool"))
    add_laws(rep, "bool", bool_sa{}, std::vector<bool>{false, true}, true);
  if (want("frac"))
    add_laws(rep, "frac", frac_sa{}, frac_carrier(), true);
  if (want("counting"))
    add_laws(rep, "counting", counting_sa<frac_sa>{}, counting_carrier(), true);
  if (want("lockable"))
    add_laws(rep, "lockable", lockable_sa<counting_sa<frac_sa>>{}, lockable_carrier(), true);
  if (want("tagged"))
    add_laws(rep, "tagged", tagged_frac_sa(), tagged_carrier(), true);
  if (want("perm"))
    add_laws(rep, "perm", perm_algebra, perm_carrier(), true);
  if (want("tree") || want("memory")) {
    env e = fixture_env();
    rng r(opt.seed);
    if (want("tree"))
      for (const type &t : {union_t("U"), struct_t("S")})
        add_laws(rep, "tree " + to_string(t), tree_sa(e, t), tree_sample(e, r, t, 6), false);
    if (want("memory"))
      add_laws(rep, "memory", mem_sa{}, memory_sample(e, r, 4), false);
  }
  if (rep.checks.empty())
    throw error("unknown law instance: " + instance);
  return rep;
}

// The separation algebra suite: the laws of the permission components and
// the algebraic properties of list disjointness.
inline report suite_sepalg(const suite_options &opt = {}) {
  report rep = run_laws("", opt);
  rep.suite = "sepalg";
  const auto xs = perm_carrier();
  const auto &s = perm_algebra;
  auto sh = [&](const perm &x) { return s.show(x); };
  auto &c1 = rep.add("empty is equivalent to the empty list");
  c1.record(list_disjoint_equiv(s, {s.empty()}, {}, xs), [] { return std::string("empty"); });
  auto &c2 = rep.add("x u y is equivalent to [x, y]");
  auto &c3 = rep.add("x2 is equivalent to [x1, x2 \\ x1]");
  for (const auto &x : xs)
    for (const auto &y : xs) {
      if (s.disjoint(x, y))
        c2.record(list_disjoint_equiv(s, {s.unite(x, y)}, {x, y}, xs),
                  [&] { return sh(x) + ", " + sh(y); });
      if (s.subseteq(x, y))
        c3.record(list_disjoint_equiv(s, {y}, {x, s.difference(y, x)}, xs),
                  [&] { return sh(x) + ", " + sh(y); });
    }
  auto &c4 = rep.add("union of a disjoint list is equivalent to the list");
  auto &c5 = rep.add("disjoint lists associate");
  for (const auto &x : xs)
    for (const auto &y : xs)
      for (const auto &z : xs) {
        std::vector<perm> l{x, y, z};
        if (!list_disjoint(s, l))
          continue;
        c4.record(list_disjoint_equiv(s, {list_union(s, l)}, l, xs),
                  [&] { return sh(x) + ", " + sh(y) + ", " + sh(z); });
        c5.record(s.unite(x, s.unite(y, z)) == s.unite(s.unite(x, y), z),
                  [&] { return sh(x) + ", " + sh(y) + ", " + sh(z); });
      }
  return rep;
}

inline report suite_perm(const suite_options & = {}) {
  report rep{"perm", {}};
  for (const auto &r : check_perm_lemma(perm_carrier())) {
    auto &c = rep.add("clause " + std::to_string(r.clause) + ": " + r.statement);
    c.cases = r.checked;
    c.failures = r.failures;
    c.witness = r.witness;
  }
  return rep;
}

// Integer coding, value/tree conversions and the tree separation structure.
inline report suite_tree(const suite_options &opt = {}) {
  report rep{"tree", {}};
  env e = fixture_env();
  {
    auto &enc = rep.add("decode after encode is the identity (1 and 2 byte types)");
    auto &dec = rep.add("encode after decode is the identity (1 and 2 byte types)");
    for (const auto &it : {schar_int, uchar_int, short_int,
                           int_type{signedness::is_unsigned, int_rank::short_rank}}) {
      std::size_t n = int_bits(e.impl, it);
      for (std::uint64_t raw = 0; raw < (std::uint64_t{1} << n); ++raw) {
        std::vector<bool> bs(n);
        for (std::size_t i = 0; i < n; ++i)
          bs[i] = (raw >> i) & 1;
        integer x = int_of_bits(e.impl, it, bs);
        dec.record(int_typed(e.impl, x, it) && int_to_bits(e.impl, it, x) == bs,
                   [&] { return to_string(it) + " bits " + std::to_string(raw); });
      }
      for (integer x = int_min(e.impl, it); x < int_upper(e.impl, it); ++x)
        enc.record(int_of_bits(e.impl, it, int_to_bits(e.impl, it, x)) == x,
                   [&] { return to_string(it) + " " + x.str(); });
    }
    auto &fig = rep.add("33 at signed short encodes as 1000010000000000");
    fig.record(to_string(bits_of_bools(int_to_bits(e.impl, short_int, 33))) ==
                   "1000010000000000",
               [&] { return to_string(bits_of_bools(int_to_bits(e.impl, short_int, 33))); });
  }
  generator g(e, opt.seed);
  auto &gen = rep.add("generated values are typed");
  auto &tv = rep.add("to_val (of_val v) = freeze v");
  auto &ty = rep.add("of_val of a typed value is a typed tree");
  auto &sv = rep.add("typed trees are separation-valid");
  auto &nv = rep.add("to_val (tree_new t) = val_new t");
  auto &nt = rep.add("of_val (val_new t) = tree_new t");
  auto &hv = rep.add("the union of the halves of a tree is the tree");
  const auto types = fixture_object_types();
  for (std::size_t k = 0; k < opt.cases; ++k) {
    mem m = g.memory(3, false);
    mem_env d = mem_env_of(m);
    type t = g.r.pick(types);
    val v = g.value(d, t);
    auto wv = [&] { return to_string(t) + " " + to_string(v); };
    bool typed = val_typed(e, d, v, t);
    gen.record(typed, wv);
    if (!typed)
      continue;
    std::vector<perm> gs(bit_size_of(e, t), g.r.chance(1, 2) ? perm_full() : perm_const(1));
    mtree w = of_val(e, gs, v);
    tv.record(to_val(e, w) == freeze(v), wv);
    ty.record(tree_typed(e, d, w, t), wv);
    sv.record(tree_sep_valid(w), wv);
    perm p = gs[0];
    nv.record(to_val(e, tree_new(e, t, p)) == val_new(e, t), [&] { return to_string(t); });
    nt.record(of_val(e, gs, val_new(e, t)) == tree_new(e, t, p), [&] { return to_string(t); });
    mtree h = tree_map([](const pbit &x) { return pbit_algebra.half(x); }, w);
    hv.record(tree_disjoint(h, h) && tree_union(h, h) == w, wv);
  }
  for (const auto &c : run_laws("tree", opt).checks)
    rep.checks.push_back(c);
  return rep;
}

// The value at a computed from the flattened object, without walking the
// tree. Defined when a is typed and strict, its subobject type contains no
// union, and every union step matches the stored variant.
inline std::optional<std::optional<val>> flat_oracle(const env &e, const mem &m, const addr &a) {
  mem_env d = mem_env_of(m);
  const live_object *l = m.live(a.index);
  if (!l || !addr_typed(e, d, a) || !addr_strict(e, a))
    return std::nullopt;
  type target = addr_is_byte(a) ? uchar_t() : a.sub;
  for (const auto &[r, u] : enumerate_refs(e, target, false))
    if (u.is_union())
      return std::nullopt;
  const mtree *w = &l->tree;
  for (const auto &s : addr_ref(e, a)) {
    if (s.k == ref_seg::kind::union_) {
      if (w->k != mtree::kind::union_ || w->variant != s.i)
        return std::nullopt;
      w = &w->children[0];
    } else {
      w = &w->children[s.i];
    }
  }
  auto xs = tree_flatten(l->tree);
  std::size_t off = addr_object_offset(e, a), n = bit_size_of(e, target);
  auto part = slice(xs, off, off + n);
  if (!all_kind_at_least(part, perm_kind::readable))
    return std::optional<val>{};
  return std::optional<val>{val_unflatten(e, target, bits_of(part))};
}

namespace detail {

inline type stored_type(const addr &a) {
  return a.cast.k == ptr_type::kind::to ? *a.cast.target : a.sub;
}

inline std::string case_text(const mem &m, const std::vector<addr> &as) {
  std::string s = dump_state(m);
  for (const auto &a : as)
    s += " at " + to_string(a);
  return s;
}

} // namespace detail

// Memory operation laws, the memory separation structure, its interaction
// with the operations, and the flat oracle.
inline report suite_mem(const suite_options &opt = {}) {
  report rep{"mem", {}};
  env e = fixture_env();
  generator g(e, opt.seed);
  auto &commute = rep.add("stores commute");
  auto &look_store = rep.add("lookup after store yields the frozen value");
  auto &look_other = rep.add("stores and lookups commute");
  auto &alter = rep.add("alter commutes");
  auto &oracle = rep.add("flat oracle agrees with lookup");
  auto &valid = rep.add("generated memories are valid");
  const std::size_t budget = opt.cases * 40;
  auto done = [&] {
    return commute.cases >= opt.cases && look_store.cases >= opt.cases &&
           look_other.cases >= opt.cases && alter.cases >= opt.cases &&
           oracle.cases >= opt.cases;
  };
  for (std::size_t k = 0; k < budget && !done(); ++k) {
    mem m = g.memory(3);
    mem_env d = mem_env_of(m);
    valid.record(mem_valid(e, d, m), [&] { return dump_state(m); });
    auto addrs = enumerate_addrs(e, d, {true, true, false});
    if (addrs.empty())
      continue;
    const addr a1 = g.r.pick(addrs), a2 = g.r.pick(addrs);
    if (auto o = flat_oracle(e, m, a1))
      oracle.record(*o == mem_lookup(e, a1, m), [&] { return detail::case_text(m, {a1}); });
    val v1 = g.value(d, detail::stored_type(a1)), v2 = g.value(d, detail::stored_type(a2));
    bool w1 = mem_writable(e, a1, m), w2 = mem_writable(e, a2, m);
    if (w1 && !addr_is_byte(a1)) {
      auto m1 = mem_insert(e, a1, v1, m);
      look_store.record(m1 && mem_lookup(e, a1, *m1) == std::optional<val>(freeze(v1)),
                        [&] { return detail::case_text(m, {a1}) + " value " + to_string(v1); });
    }
    if (!addr_disjoint(e, a1, a2))
      continue;
    if (w1 && w2) {
      auto x = mem_insert(e, a2, v2, m), y = mem_insert(e, a1, v1, m);
      auto xy = x ? mem_insert(e, a1, v1, *x) : std::nullopt;
      auto yx = y ? mem_insert(e, a2, v2, *y) : std::nullopt;
      commute.record(xy && yx && *xy == *yx, [&] { return detail::case_text(m, {a1, a2}); });
    }
    if (w2) {
      if (auto before = mem_lookup(e, a1, m)) {
        auto x = mem_insert(e, a2, v2, m);
        look_other.record(x && mem_lookup(e, a1, *x) == before,
                          [&] { return detail::case_text(m, {a1, a2}); });
      }
    }
    auto l1 = cmap_lookup(e, a1, m), l2 = cmap_lookup(e, a2, m);
    if (l1 && l2) {
      tree_fn f1 = [&](const mtree &w) {
        return tree_map([](const pbit &x) { return make_pbit(x.value, bit_indet()); }, w);
      };
      tree_fn f2 = [&](const mtree &w) {
        return tree_map([](const pbit &x) { return make_pbit(perm_lock(x.value), x.tag); }, w);
      };
      if (tree_typed(e, d, f1(*l1), type_of(*l1)) && tree_typed(e, d, f2(*l2), type_of(*l2))) {
        auto x = cmap_alter(e, f2, a2, m), y = cmap_alter(e, f1, a1, m);
        auto xy = x ? cmap_alter(e, f1, a1, *x) : std::nullopt;
        auto yx = y ? cmap_alter(e, f2, a2, *y) : std::nullopt;
        alter.record(xy && yx && *xy == *yx, [&] { return detail::case_text(m, {a1, a2}); });
      }
    }
  }

  auto &pl = rep.add("lookups are preserved by larger memories");
  auto &pw = rep.add("writability is preserved by larger memories");
  auto &uv = rep.add("a union is valid iff both parts are valid");
  auto &dl = rep.add("operations stay below in the disjointness order");
  auto &dd = rep.add("operations on one part keep the parts disjoint");
  auto &df = rep.add("force distributes over union");
  auto &di = rep.add("insert distributes over union");
  auto &dk = rep.add("lock distributes over union");
  auto &du = rep.add("unlock distributes over union");
  for (std::size_t k = 0; k < opt.cases; ++k) {
    mem m = g.memory(3);
    auto [m1, m2] = split_mem(g.r, m);
    auto wm = [&] { return dump_state(m1) + " | " + dump_state(m2); };
    if (!mem_disjoint(m1, m2) || !(mem_union(m1, m2) == m)) {
      uv.record(false, [&] { return "split does not recombine: " + wm(); });
      continue;
    }
    mem_env d = mem_env_of(m);
    uv.record(mem_valid(e, d, m) == (mem_valid(e, d, m1) && mem_valid(e, d, m2)), wm);
    auto addrs = enumerate_addrs(e, d, {true, true, false});
    const addr a = g.r.pick(addrs);
    val v = g.value(d, detail::stored_type(a));
    auto wa = [&] { return wm() + " at " + to_string(a); };
    if (auto x = mem_lookup(e, a, m1))
      pl.record(mem_lookup(e, a, m) == x, wa);
    if (mem_writable(e, a, m1))
      pw.record(mem_writable(e, a, m), wa);
    std::vector<mem> sample{m2, mem{}};
    auto [m3, m4] = split_mem(g.r, m2);
    sample.push_back(m3);
    sample.push_back(m4);
    auto check = [&](check_result &dist, const std::optional<mem> &op1,
                     const std::optional<mem> &op) {
      if (!op1)
        return;
      dl.record(mem_disjoint_le(m1, *op1, sample), wa);
      dd.record(mem_disjoint(*op1, m2), wa);
      dist.record(op && *op == mem_union(*op1, m2), wa);
    };
    if (mem_lookup(e, a, m1))
      check(df, mem_force(e, a, m1), mem_force(e, a, m));
    if (mem_writable(e, a, m1)) {
      check(di, mem_insert(e, a, v, m1), mem_insert(e, a, v, m));
      check(dk, mem_lock(e, a, m1), mem_lock(e, a, m));
    }
    lockset omega = mem_locks(m1);
    if (!omega.empty() || g.r.chance(1, 4))
      check(du, mem_unlock(omega, m1), mem_unlock(omega, m));
    else if (auto l = mem_lock(e, a, m1); l && mem_writable(e, a, m1)) {
      lockset om = mem_locks(*l);
      mem big = mem_union(*l, m2);
      auto ul = mem_unlock(om, *l);
      dl.record(mem_disjoint_le(*l, ul, sample), wa);
      dd.record(mem_disjoint(ul, m2), wa);
      du.record(mem_unlock(om, big) == mem_union(ul, m2), wa);
    }
  }
  for (const auto &c : run_laws("memory", opt).checks)
    rep.checks.push_back(c);
  return rep;
}

namespace detail {

// Gives the object o of m the new identity fn(o) wherever it occurs.
struct rename_map {
  const env &e;
  const renaming &f;
  const mem_env &d2;

  bit rename(const bit &b) const {
    if (b.k != bit::kind::frag || b.p->k != ptr::kind::address)
      return b;
    auto a = rename_addr(e, f, d2, b.p->a);
    if (!a)
      return b;
    return bit_frag(std::make_shared<const ptr>(addr_ptr(*a)), b.i);
  }
  mtree rename(const mtree &w) const {
    return tree_map([&](const pbit &x) { return make_pbit(x.value, rename(x.tag)); }, w);
  }
  val rename(const val &v) const {
    val out = v;
    if (v.k == val::kind::base) {
      if (v.b.k == base_val::kind::pointer && v.b.p.k == ptr::kind::address)
        if (auto a = rename_addr(e, f, d2, v.b.p.a))
          out.b.p = addr_ptr(*a);
      if (v.b.k == base_val::kind::byte)
        for (auto &b : out.b.bits)
          b = rename(b);
      return out;
    }
    for (auto &c : out.children)
      c = rename(c);
    return out;
  }
};

// Makes w more defined: forgets union variants, fills indeterminate leaf bits
// and overwrites fragments of dangling pointers.
inline mtree weaken(rng &r, const mem_env &d1, const env &e, const mtree &w) {
  auto fill = [&](std::vector<pbit> xs) {
    for (auto &x : xs)
      if (!pbit_algebra.unmapped(x) &&
          (x.tag.is_indet() || bit_dead_frag(e, d1, x.tag)) && r.chance(1, 2))
        x.tag = bit_of(r.chance(1, 2));
    return xs;
  };
  mtree out = w;
  switch (w.k) {
  case mtree::kind::base:
  case mtree::kind::union_all:
    out.bits = fill(w.bits);
    return out;
  case mtree::kind::array:
  case mtree::kind::struct_:
    for (auto &c : out.children)
      c = weaken(r, d1, e, c);
    return out;
  case mtree::kind::union_:
    if (all_unshared(tree_flatten(w)) && r.chance(1, 2))
      return tree_union_all(w.tag, fill(tree_flatten(w)));
    out.children[0] = weaken(r, d1, e, w.children[0]);
    return out;
  }
  return out;
}

struct refined_pair {
  renaming f;
  mem target;
};

// A target memory that m refines to: objects are renamed, two objects of
// equal type may be merged into a two element array, and the contents are
// weakened.
inline refined_pair refine_step(const env &e, rng &r, const mem &m) {
  mem_env d1 = mem_env_of(m);
  std::vector<object_id> ids;
  for (const auto &[o, _] : d1)
    ids.push_back(o);
  std::optional<std::pair<object_id, object_id>> merge;
  for (std::size_t i = 0; i < ids.size() && !merge; ++i)
    for (std::size_t j = i + 1; j < ids.size() && !merge; ++j) {
      const auto *l1 = m.live(ids[i]), *l2 = m.live(ids[j]);
      if (l1 && l2 && !l1->malloced && !l2->malloced && d1.at(ids[i]).t == d1.at(ids[j]).t &&
          r.chance(2, 3))
        merge = {{ids[i], ids[j]}};
    }
  object_id base = 100 + 100 * r.below(5);
  renaming f;
  mem_env d2;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    object_id o = ids[i], target = base + (ids.size() - i);
    if (merge && o == merge->second)
      continue;
    if (merge && o == merge->first) {
      type t = d1.at(o).t;
      type at = array_t(t, 2);
      f[o] = {target, {freeze(seg_array(0, t, 2))}};
      f[merge->second] = {target, {freeze(seg_array(1, t, 2))}};
      d2[target] = {at, false};
      continue;
    }
    f[o] = {target, {}};
    d2[target] = d1.at(o);
  }
  rename_map rn{e, f, d2};
  mem out;
  for (const auto &[o, c] : m.cells) {
    const auto &[target, rr] = f.at(o);
    const auto *l = std::get_if<live_object>(&c);
    if (!l) {
      out.cells[target] = c;
      continue;
    }
    mtree w = weaken(r, d1, e, rn.rename(l->tree));
    if (rr.empty()) {
      out.cells[target] = live_object{w, l->malloced};
      continue;
    }
    if (!out.cells.count(target)) {
      type t = type_of(w);
      out.cells[target] = live_object{
          tree_array(t, {tree_new(e, t, perm_full()), tree_new(e, t, perm_full())}), false};
    }
    std::get<live_object>(out.cells[target]).tree.children[rr[0].i] = w;
  }
  return {f, out};
}

} // namespace detail

// Memory refinements: identity, composition, the union rule, constant
// propagation, memcpy, force erasure and preservation of lookup and insert.
inline report suite_refine(const suite_options &opt = {}) {
  report rep{"refine", {}};
  env e = fixture_env();
  generator g(e, opt.seed);
  auto &idc = rep.add("valid memories refine to themselves under the identity");
  auto &step = rep.add("generated refinement steps hold");
  auto &comp = rep.add("refinements compose");
  auto &un = rep.add("a union in known variant refines to unknown variant");
  auto &fz = rep.add("freeze v refines to v");
  auto &cp = rep.add("constant propagation");
  auto &mc1 = rep.add("memcpy: copy by value refines the object");
  auto &mc2 = rep.add("memcpy: an object with unshared unions refines its byte copy");
  auto &fe = rep.add("force can be erased for frozen addresses");
  auto &lk = rep.add("lookups are preserved by refinement");
  auto &wr = rep.add("writability is preserved by refinement");
  auto &in = rep.add("stores are preserved by refinement");
  for (std::size_t k = 0; k < opt.cases; ++k) {
    mem m;
    if (g.r.chance(1, 3)) {
      type t = g.r.pick(fixture_object_types());
      m = mem_alloc(e, 1, val_new(e, t), false, m);
      m = mem_alloc(e, 2, val_new(e, t), false, m);
      mem_env d = mem_env_of(m);
      for (object_id o : {object_id{1}, object_id{2}})
        if (auto x = mem_insert(e, {o, t, {}, 0, t, ptr_to(t)}, g.value(d, t), m))
          m = *x;
    } else {
      m = g.memory(3);
    }
    mem_env d = mem_env_of(m);
    auto wm = [&] { return dump_state(m); };
    idc.record(mem_refine(e, renaming_id(d), m, m),
               [&] { return wm() + ": " + mem_refine_failure(e, renaming_id(d), m, m).value_or(""); });

    auto [f, m2] = detail::refine_step(e, g.r, m);
    auto ws = [&] { return wm() + " => " + dump_state(m2); };
    bool ok1 = mem_refine(e, f, m, m2);
    step.record(ok1, [&] { return ws() + ": " + mem_refine_failure(e, f, m, m2).value_or(""); });
    if (ok1) {
      auto [f2, m3] = detail::refine_step(e, g.r, m2);
      if (mem_refine(e, f2, m2, m3)) {
        renaming fc = renaming_compose(f2, f);
        comp.record(mem_refine(e, fc, m, m3), [&] {
          return ws() + " => " + dump_state(m3) + ": " +
                 mem_refine_failure(e, fc, m, m3).value_or("");
        });
      }
    }

    // Union rule, memcpy on whole objects.
    for (const auto &[o, c] : m.cells) {
      const auto *l = std::get_if<live_object>(&c);
      if (!l)
        continue;
      const mtree &w = l->tree;
      type t = type_of(w);
      auto xs = tree_flatten(w);
      auto wt = [&] { return to_string(w); };
      mc1.record(tree_refine(e, renaming_id(d), d, d, of_val(e, perms_of(xs), to_val(e, w)), w, t),
                 wt);
      if (unions_unshared(w))
        mc2.record(tree_refine(e, renaming_id(d), d, d, w, tree_unflatten(e, t, xs), t), wt);
      if (w.k == mtree::kind::union_ && all_unshared(xs))
        un.record(tree_refine(e, renaming_id(d), d, d, w, tree_union_all(w.tag, xs), t), wt);
    }
    // Union rule on freshly stored unions with full or read-only permissions.
    for (int k = 0; k < 2; ++k) {
      type ut = union_t("U");
      val uv = g.value(d, ut);
      perm gp = g.r.chance(1, 2) ? perm_full() : perm_const(1);
      mtree w = of_val(e, std::vector<perm>(bit_size_of(e, ut), gp), uv);
      if (w.k == mtree::kind::union_)
        un.record(tree_refine(e, renaming_id(d), d, d, w, tree_union_all(w.tag, tree_flatten(w)), ut),
                  [&] { return to_string(w); });
    }
    type t = g.r.pick(fixture_object_types());
    val v = g.value(d, t);
    if (val_typed(e, d, v, t))
      fz.record(val_refine(e, renaming_id(d), d, d, freeze(v), v, t),
                [&] { return to_string(v); });

    auto addrs = enumerate_addrs(e, d, {true, true, false});
    if (addrs.empty())
      continue;
    const addr a = g.r.pick(addrs);
    type st = detail::stored_type(a);
    val va = g.value(d, st);
    auto wa = [&] { return wm() + " at " + to_string(a) + " value " + to_string(va); };
    if (mem_writable(e, a, m)) {
      auto m1 = mem_insert(e, a, va, m);
      auto v2 = m1 ? mem_lookup(e, a, *m1) : std::nullopt;
      cp.record(v2 && val_refine(e, renaming_id(d), d, d, *v2, va, st), wa);
    }
    if (addr_frozen(a) && mem_lookup(e, a, m)) {
      auto mf = mem_force(e, a, m);
      fe.record(mf && mem_refine(e, renaming_id(d), *mf, m), wa);
    }
    if (!ok1)
      continue;
    mem_env d2 = mem_env_of(m2);
    auto a2 = rename_addr(e, f, d2, a);
    if (!a2 || !addr_refine(e, f, d, d2, a, *a2))
      continue;
    auto wb = [&] { return ws() + " at " + to_string(a) + " value " + to_string(va); };
    if (auto v1 = mem_lookup(e, a, m)) {
      auto v2 = mem_lookup(e, *a2, m2);
      lk.record(v2 && val_refine(e, f, d, d2, *v1, *v2, st), wb);
    }
    if (mem_writable(e, a, m)) {
      wr.record(mem_writable(e, *a2, m2), wb);
      val vb = detail::rename_map{e, f, d2}.rename(va);
      auto x1 = mem_insert(e, a, va, m), x2 = mem_insert(e, *a2, vb, m2);
      in.record(x1 && x2 && mem_refine(e, f, *x1, *x2), wb);
    }
  }
  return rep;
}

// Memories over the fixture with an object that nests union U inside structs
// and a standalone U, in each possible state of the unions.
inline std::vector<mem> aliasing_memories(const env &e) {
  std::vector<mem> out;
  type i = int_t(sint_int), s = int_t(short_int);
  for (int variant : {0, 1, 2}) {
    mem m;
    m = mem_alloc(e, 1, val_new(e, struct_t("T")), false, m);
    m = mem_alloc(e, 2, val_new(e, union_t("U")), false, m);
    if (variant < 2) {
      std::size_t k = static_cast<std::size_t>(variant);
      type vt = k == 0 ? i : s;
      val x = k == 0 ? v_int(sint_int, 7) : v_int(short_int, 7);
      addr a1{1, struct_t("T"), {seg_struct(1, "T"), seg_struct(1, "S"), seg_union(k, "U", false)},
              0, vt, ptr_to(vt)};
      addr a2{2, union_t("U"), {seg_union(k, "U", false)}, 0, vt, ptr_to(vt)};
      m = *mem_insert(e, a1, x, m);
      m = *mem_insert(e, a2, x, m);
    }
    out.push_back(m);
  }
  return out;
}

// The strict-aliasing trichotomy over every pair of frozen, non-character
// addresses into the fixture objects.
inline report suite_aliasing(const suite_options &opt = {}) {
  report rep{"aliasing", {}};
  env e = fixture_env();
  generator g(e, opt.seed);
  auto &all = rep.add("every pair is related by type, disjoint, or mutually inaccessible");
  auto &c1 = rep.add("pairs covered by the subobject relation");
  auto &c2 = rep.add("pairs covered by disjointness");
  auto &c3 = rep.add("pairs covered by mutual inaccessibility");
  for (const mem &m : aliasing_memories(e)) {
    mem_env d = mem_env_of(m);
    std::vector<addr> addrs;
    for (const auto &a : enumerate_addrs(e, d, {false, false, true}))
      if (!(a.sub == uchar_t()))
        addrs.push_back(a);
    for (const auto &a1 : addrs)
      for (const auto &a2 : addrs) {
        bool sub = subtype(e, a1.sub, a2.sub) || subtype(e, a2.sub, a1.sub);
        bool dis = addr_disjoint(e, a1, a2);
        auto after = [&](const std::optional<mem> &mm, const addr &a) {
          return !mm || !mem_lookup(e, a, *mm);
        };
        bool fails = after(mem_force(e, a2, m), a1) && after(mem_force(e, a1, m), a2);
        for (int j = 0; j < 2 && fails; ++j) {
          val v1 = g.value(d, a1.sub), v2 = g.value(d, a2.sub);
          fails = after(mem_insert(e, a2, v2, m), a1) &&
                  after(mem_insert(e, a1, v1, m), a2);
        }
        if (sub)
          c1.record(true, {});
        if (dis)
          c2.record(true, {});
        if (fails)
          c3.record(true, {});
        all.record(sub || dis || fails,
                   [&] { return detail::case_text(m, {a1, a2}); });
      }
  }
  return rep;
}

inline std::vector<std::string> suite_names() {
  return {"sepalg", "perm", "tree", "mem", "refine", "aliasing"};
}

inline report run_suite(const std::string &name, const suite_options &opt = {}) {
  if (name == "sepalg")
    return suite_sepalg(opt);
  if (name == "perm")
    return suite_perm(opt);
  if (name == "tree")
    return suite_tree(opt);
  if (name == "mem")
    return suite_mem(opt);
  if (name == "refine")
    return suite_refine(opt);
  if (name == "aliasing")
    return suite_aliasing(opt);
  throw error("unknown suite: " + name);
}

} // namespace ch2o
