// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/sepalg.hpp"

#include <string>
#include <vector>

namespace ch2o {

// Non-const permissions are lockable counted fractions, const permissions are
// plain fractions.
using perm_sa = sum_sa<lockable_sa<counting_sa<frac_sa>>, frac_sa>;
using perm = perm_sa::element;

inline const perm_sa perm_algebra{};

inline perm perm_unlocked(rational count, rational frac) {
  return perm_sa::inl({false, {count, frac}});
}
inline perm perm_locked(rational count, rational frac) {
  return perm_sa::inl({true, {count, frac}});
}
inline perm perm_const(rational frac) { return perm_sa::inr(frac); }

inline perm perm_full() { return perm_unlocked(0, 1); }
inline perm perm_empty() { return perm_algebra.empty(); }
inline perm perm_token() { return perm_unlocked(-1, 0); }

enum class perm_kind { none, existing, readable, locked, writable };

inline const char *to_string(perm_kind k) {
  switch (k) {
  case perm_kind::none:
    return "none";
  case perm_kind::existing:
    return "existing";
  case perm_kind::readable:
    return "readable";
  case perm_kind::locked:
    return "locked";
  case perm_kind::writable:
    return "writable";
  }
  return "?";
}

// The lattice order: none < existing < {readable, locked} < writable, where
// readable and locked are incomparable.
inline bool kind_le(perm_kind a, perm_kind b) {
  if (a == b || a == perm_kind::none || b == perm_kind::writable)
    return true;
  if (a == perm_kind::existing)
    return b != perm_kind::none;
  return false;
}

inline perm_kind kind_of(const perm &p) {
  if (!perm_sa::is_left(p))
    return 0 < perm_sa::get_right(p) ? perm_kind::readable : perm_kind::none;
  const auto &l = perm_sa::get_left(p);
  if (l.locked)
    return perm_kind::locked;
  const rational &c = l.value.count, &f = l.value.value;
  if (f == rational(1))
    return perm_kind::writable;
  if (0 < f && f < 1)
    return perm_kind::readable;
  if (f == rational(0) && c != rational(0))
    return perm_kind::existing;
  return perm_kind::none;
}

inline perm perm_lock(const perm &p) {
  if (perm_sa::is_left(p) && !perm_sa::get_left(p).locked) {
    auto l = perm_sa::get_left(p);
    l.locked = true;
    return perm_sa::inl(l);
  }
  return p;
}

inline perm perm_unlock(const perm &p) {
  if (perm_sa::is_left(p) && perm_sa::get_left(p).locked) {
    auto l = perm_sa::get_left(p);
    l.locked = false;
    return perm_sa::inl(l);
  }
  return p;
}

inline perm perm_half(const perm &p) { return perm_algebra.half(p); }

inline std::string to_string(const perm &p) {
  if (!perm_sa::is_left(p))
    return "C(" + to_string(perm_sa::get_right(p)) + ")";
  const auto &l = perm_sa::get_left(p);
  return std::string(l.locked ? "L(" : "U(") + to_string(l.value.count) + "," +
         to_string(l.value.value) + ")";
}

// Counters in {-1, -1/2, 0, 1/2}, fractions in {0, 1/4, 1/2, 1}, both lock
// states, plus the const fractions.
inline std::vector<perm> perm_carrier() {
  const std::vector<rational> counts{-1, rational(-1, 2), 0, rational(1, 2)};
  const std::vector<rational> fracs{0, rational(1, 4), rational(1, 2), 1};
  std::vector<perm> out;
  for (bool locked : {false, true})
    for (const auto &c : counts)
      for (const auto &f : fracs)
        out.push_back(locked ? perm_locked(c, f) : perm_unlocked(c, f));
  for (const auto &f : fracs)
    out.push_back(perm_const(f));
  return out;
}

struct perm_lemma_result {
  int clause = 0;
  std::string statement;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string witness;
};

// Checks the six properties of the permission operations on every valid
// element (or pair) of `carrier`.
inline std::vector<perm_lemma_result>
check_perm_lemma(const std::vector<perm> &carrier) {
  std::vector<perm_lemma_result> out{
      {1, "writable <= kind x -> unlock (lock x) = x", 0, 0, {}},
      {2, "writable <= kind x -> kind (lock x) = locked", 0, 0, {}},
      {3, "kind (half x) = readable if writable <= kind x, else kind x", 0, 0, {}},
      {4, "kind token = existing", 0, 0, {}},
      {5, "token <= x, x != token -> kind (x \\ token) = kind x", 0, 0, {}},
      {6, "x1 <= x2 -> kind x1 <= kind x2", 0, 0, {}},
  };
  auto rec = [](perm_lemma_result &r, bool ok, const std::string &w) {
    ++r.checked;
    if (!ok && r.failures++ == 0)
      r.witness = w;
  };
  const perm_sa &s = perm_algebra;
  rec(out[3], kind_of(perm_token()) == perm_kind::existing, to_string(perm_token()));
  for (const auto &x : carrier) {
    if (!s.valid(x))
      continue;
    bool w = kind_le(perm_kind::writable, kind_of(x));
    if (w) {
      rec(out[0], perm_unlock(perm_lock(x)) == x, to_string(x));
      rec(out[1], kind_of(perm_lock(x)) == perm_kind::locked, to_string(x));
    }
    perm_kind expect = w ? perm_kind::readable : kind_of(x);
    rec(out[2], kind_of(perm_half(x)) == expect, to_string(x));
    if (s.subseteq(perm_token(), x) && !(x == perm_token()))
      rec(out[4], kind_of(s.difference(x, perm_token())) == kind_of(x),
          to_string(x));
    for (const auto &y : carrier)
      if (s.valid(y) && s.subseteq(x, y))
        rec(out[5], kind_le(kind_of(x), kind_of(y)),
            to_string(x) + " <= " + to_string(y));
  }
  return out;
}

} // namespace ch2o
