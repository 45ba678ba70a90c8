// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include <boost/rational.hpp>

#include <concepts>
#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ch2o {

using rational = boost::rational<long long>;

inline std::string to_string(const rational &q) {
  if (q.denominator() == 1)
    return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// The core operations of a separation algebra. `unite` is the partial union,
// only meaningful on disjoint arguments; `difference(y, x)` is y minus x, only
// meaningful when x is a subset of y.
template <class S>
concept sep_algebra = requires(const S &s, const typename S::element &x) {
  { s.empty() } -> std::convertible_to<typename S::element>;
  { s.valid(x) } -> std::same_as<bool>;
  { s.disjoint(x, x) } -> std::same_as<bool>;
  { s.subseteq(x, x) } -> std::same_as<bool>;
  { s.unite(x, x) } -> std::convertible_to<typename S::element>;
  { s.difference(x, x) } -> std::convertible_to<typename S::element>;
  { s.show(x) } -> std::convertible_to<std::string>;
  { x == x } -> std::convertible_to<bool>;
};

template <class S>
concept ext_sep_algebra =
    sep_algebra<S> && requires(const S &s, const typename S::element &x) {
      { s.splittable(x) } -> std::same_as<bool>;
      { s.half(x) } -> std::convertible_to<typename S::element>;
      { s.unmapped(x) } -> std::same_as<bool>;
      { s.unshared(x) } -> std::same_as<bool>;
    };

// x is below y iff y minus x is a disjoint complement of x. Used by the
// instances whose order is not given directly.
template <sep_algebra S>
bool subseteq_by_difference(const S &s, const typename S::element &x,
                            const typename S::element &y) {
  auto d = s.difference(y, x);
  return s.disjoint(x, d) && s.unite(x, d) == y;
}

struct bool_sa {
  using element = bool;
  element empty() const { return false; }
  bool valid(bool) const { return true; }
  bool disjoint(bool x, bool y) const { return !x || !y; }
  element unite(bool x, bool y) const { return x || y; }
  bool subseteq(bool x, bool y) const { return !x || y; }
  element difference(bool x, bool y) const { return x && !y; }
  bool splittable(bool x) const { return !x; }
  element half(bool) const { return false; }
  bool unmapped(bool x) const { return !x; }
  bool unshared(bool x) const { return x; }
  std::string show(bool x) const { return x ? "true" : "false"; }
};

struct frac_sa {
  using element = rational;
  element empty() const { return 0; }
  bool valid(const rational &x) const { return 0 <= x && x <= 1; }
  bool disjoint(const rational &x, const rational &y) const {
    return 0 <= x && 0 <= y && x + y <= 1;
  }
  element unite(const rational &x, const rational &y) const { return x + y; }
  bool subseteq(const rational &x, const rational &y) const {
    return 0 <= x && x <= y && y <= 1;
  }
  element difference(const rational &x, const rational &y) const {
    return x - y;
  }
  bool splittable(const rational &x) const { return valid(x); }
  element half(const rational &x) const { return x / 2; }
  bool unmapped(const rational &x) const { return x == rational(0); }
  bool unshared(const rational &x) const { return x == rational(1); }
  std::string show(const rational &x) const { return to_string(x); }
};

// Pairs of a rational counter and an inner element. Negative counters are
// tokens handed out by the owner of a positive counter.
template <ext_sep_algebra A> struct counting_sa {
  A inner{};

  struct element {
    rational count{0};
    typename A::element value{};
    friend bool operator==(const element &, const element &) = default;
  };

  element empty() const { return {0, inner.empty()}; }
  bool valid(const element &x) const {
    return inner.valid(x.value) && (!inner.unmapped(x.value) || x.count <= 0) &&
           (!inner.unshared(x.value) || 0 <= x.count);
  }
  bool disjoint(const element &x, const element &y) const {
    return inner.disjoint(x.value, y.value) &&
           (!inner.unmapped(x.value) || x.count <= 0) &&
           (!inner.unmapped(y.value) || y.count <= 0) &&
           (!inner.unshared(inner.unite(x.value, y.value)) ||
            0 <= x.count + y.count);
  }
  element unite(const element &x, const element &y) const {
    return {x.count + y.count, inner.unite(x.value, y.value)};
  }
  element difference(const element &x, const element &y) const {
    return {x.count - y.count, inner.difference(x.value, y.value)};
  }
  bool subseteq(const element &x, const element &y) const {
    return subseteq_by_difference(*this, x, y);
  }
  bool splittable(const element &x) const {
    return inner.splittable(x.value) &&
           (!inner.unmapped(x.value) || x.count <= 0) &&
           (!inner.unshared(x.value) || 0 <= x.count);
  }
  element half(const element &x) const {
    return {x.count / 2, inner.half(x.value)};
  }
  bool unmapped(const element &x) const {
    return inner.unmapped(x.value) && x.count <= 0;
  }
  bool unshared(const element &x) const {
    return inner.unshared(x.value) && 0 <= x.count;
  }
  std::string show(const element &x) const {
    return "(" + to_string(x.count) + "," + inner.show(x.value) + ")";
  }
};

// Adds a lock flag. A locked element must be unshared and can only be
// combined with unmapped unlocked elements.
template <ext_sep_algebra A> struct lockable_sa {
  A inner{};

  struct element {
    bool locked = false;
    typename A::element value{};
    friend bool operator==(const element &, const element &) = default;
  };

  element empty() const { return {false, inner.empty()}; }
  bool valid(const element &x) const {
    return x.locked ? inner.unshared(x.value) : inner.valid(x.value);
  }
  bool disjoint(const element &x, const element &y) const {
    if (x.locked && y.locked)
      return false;
    if (!inner.disjoint(x.value, y.value))
      return false;
    if (x.locked)
      return inner.unshared(x.value) && inner.unmapped(y.value);
    if (y.locked)
      return inner.unmapped(x.value) && inner.unshared(y.value);
    return true;
  }
  element unite(const element &x, const element &y) const {
    return {x.locked || y.locked, inner.unite(x.value, y.value)};
  }
  // Removing the locked part of a locked element leaves an unlocked rest.
  element difference(const element &x, const element &y) const {
    return {x.locked && !y.locked, inner.difference(x.value, y.value)};
  }
  bool subseteq(const element &x, const element &y) const {
    return subseteq_by_difference(*this, x, y);
  }
  bool splittable(const element &x) const {
    return !x.locked && inner.splittable(x.value);
  }
  element half(const element &x) const {
    return x.locked ? x : element{false, inner.half(x.value)};
  }
  bool unmapped(const element &x) const {
    return !x.locked && inner.unmapped(x.value);
  }
  bool unshared(const element &x) const { return inner.unshared(x.value); }
  std::string show(const element &x) const {
    return std::string(x.locked ? "L" : "U") + inner.show(x.value);
  }
};

// How the right injection of a sum decides splittability.
enum class sum_split_rule {
  // Nonempty right elements split like their payload.
  nonempty,
  // Only the empty right element is splittable.
  empty_only,
};

template <ext_sep_algebra A, ext_sep_algebra B,
          sum_split_rule Rule = sum_split_rule::nonempty>
struct sum_sa {
  A left{};
  B right{};

  using element = std::variant<typename A::element, typename B::element>;

  static bool is_left(const element &x) { return x.index() == 0; }
  static const typename A::element &get_left(const element &x) {
    return std::get<0>(x);
  }
  static const typename B::element &get_right(const element &x) {
    return std::get<1>(x);
  }
  static element inl(typename A::element x) {
    return element(std::in_place_index<0>, std::move(x));
  }
  static element inr(typename B::element x) {
    return element(std::in_place_index<1>, std::move(x));
  }

  element empty() const { return inl(left.empty()); }
  bool valid(const element &x) const {
    if (is_left(x))
      return left.valid(get_left(x));
    return right.valid(get_right(x)) && !(get_right(x) == right.empty());
  }
  bool disjoint(const element &x, const element &y) const {
    if (is_left(x) && is_left(y))
      return left.disjoint(get_left(x), get_left(y));
    if (!is_left(x) && !is_left(y))
      return right.disjoint(get_right(x), get_right(y)) &&
             !(get_right(x) == right.empty()) &&
             !(get_right(y) == right.empty());
    if (is_left(x))
      return get_left(x) == left.empty() && valid(y);
    return valid(x) && get_left(y) == left.empty();
  }
  element unite(const element &x, const element &y) const {
    if (is_left(x) && is_left(y))
      return inl(left.unite(get_left(x), get_left(y)));
    if (!is_left(x) && !is_left(y))
      return inr(right.unite(get_right(x), get_right(y)));
    return is_left(x) ? y : x;
  }
  element difference(const element &x, const element &y) const {
    if (is_left(x) && is_left(y))
      return inl(left.difference(get_left(x), get_left(y)));
    if (!is_left(x) && !is_left(y)) {
      if (get_right(x) == get_right(y))
        return empty();
      return inr(right.difference(get_right(x), get_right(y)));
    }
    return x;
  }
  bool subseteq(const element &x, const element &y) const {
    return subseteq_by_difference(*this, x, y);
  }
  bool splittable(const element &x) const {
    if (is_left(x))
      return left.splittable(get_left(x));
    bool is_empty = get_right(x) == right.empty();
    if constexpr (Rule == sum_split_rule::empty_only)
      return right.splittable(get_right(x)) && is_empty;
    else
      return right.splittable(get_right(x)) && !is_empty;
  }
  element half(const element &x) const {
    if (is_left(x))
      return inl(left.half(get_left(x)));
    return inr(right.half(get_right(x)));
  }
  bool unmapped(const element &x) const {
    if (is_left(x))
      return left.unmapped(get_left(x));
    return right.unmapped(get_right(x)) && !(get_right(x) == right.empty());
  }
  bool unshared(const element &x) const {
    if (is_left(x))
      return left.unshared(get_left(x));
    return right.unshared(get_right(x));
  }
  std::string show(const element &x) const {
    if (is_left(x))
      return "inl " + left.show(get_left(x));
    return "inr " + right.show(get_right(x));
  }
};

// Attaches a tag to each element. Unmapped elements carry the default tag so
// that the tag of a union is decided by the mapped side.
template <ext_sep_algebra A, class T> struct tagged_sa {
  A inner{};
  T default_tag{};
  std::function<std::string(const T &)> show_tag;

  struct element {
    typename A::element value{};
    T tag{};
    friend bool operator==(const element &, const element &) = default;
  };

  element empty() const { return {inner.empty(), default_tag}; }
  bool valid(const element &x) const {
    return inner.valid(x.value) &&
           (!inner.unmapped(x.value) || x.tag == default_tag);
  }
  bool disjoint(const element &x, const element &y) const {
    bool ux = inner.unmapped(x.value), uy = inner.unmapped(y.value);
    return inner.disjoint(x.value, y.value) && (ux || x.tag == y.tag || uy) &&
           (!ux || x.tag == default_tag) && (!uy || y.tag == default_tag);
  }
  element unite(const element &x, const element &y) const {
    return {inner.unite(x.value, y.value), x.tag == default_tag ? y.tag : x.tag};
  }
  element difference(const element &x, const element &y) const {
    auto d = inner.difference(x.value, y.value);
    bool um = inner.unmapped(d);
    return {std::move(d), um ? default_tag : x.tag};
  }
  bool subseteq(const element &x, const element &y) const {
    return subseteq_by_difference(*this, x, y);
  }
  bool splittable(const element &x) const {
    return inner.splittable(x.value) &&
           (!inner.unmapped(x.value) || x.tag == default_tag);
  }
  element half(const element &x) const { return {inner.half(x.value), x.tag}; }
  bool unmapped(const element &x) const {
    return inner.unmapped(x.value) && x.tag == default_tag;
  }
  bool unshared(const element &x) const { return inner.unshared(x.value); }
  std::string show(const element &x) const {
    return "<" + inner.show(x.value) + "," +
           (show_tag ? show_tag(x.tag) : std::string("?")) + ">";
  }
};

// Disjointness of a list: each element is disjoint from the union of the
// elements after it.
template <sep_algebra S>
bool list_disjoint(const S &s, const std::vector<typename S::element> &xs) {
  typename S::element acc = s.empty();
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
    if (!s.disjoint(*it, acc))
      return false;
    acc = s.unite(*it, acc);
  }
  return true;
}

template <sep_algebra S>
typename S::element list_union(const S &s,
                               const std::vector<typename S::element> &xs) {
  typename S::element acc = s.empty();
  for (auto it = xs.rbegin(); it != xs.rend(); ++it)
    acc = s.unite(*it, acc);
  return acc;
}

// xs is below ys iff every x disjoint from xs is also disjoint from ys. Since the
// quantifier ranges over all elements, it is evaluated over a finite sample.
template <sep_algebra S>
bool list_disjoint_le(const S &s, const std::vector<typename S::element> &xs,
                      const std::vector<typename S::element> &ys,
                      const std::vector<typename S::element> &sample) {
  for (const auto &x : sample) {
    auto xxs = xs;
    xxs.insert(xxs.begin(), x);
    if (!list_disjoint(s, xxs))
      continue;
    auto xys = ys;
    xys.insert(xys.begin(), x);
    if (!list_disjoint(s, xys))
      return false;
  }
  return true;
}

template <sep_algebra S>
bool list_disjoint_equiv(const S &s, const std::vector<typename S::element> &xs,
                         const std::vector<typename S::element> &ys,
                         const std::vector<typename S::element> &sample) {
  return list_disjoint_le(s, xs, ys, sample) &&
         list_disjoint_le(s, ys, xs, sample);
}

struct law_result {
  int law = 0;
  std::string statement;
  std::size_t checked = 0;
  std::size_t failures = 0;
  std::string witness;
};

namespace detail {

inline void record(law_result &r, bool ok, const std::function<std::string()> &w) {
  ++r.checked;
  if (!ok) {
    if (r.failures == 0)
      r.witness = w();
    ++r.failures;
  }
}

} // namespace detail

// Checks the core laws (1-8) and, when `extended` holds, the laws of the
// extended operations (9-18) on every tuple drawn from `sample`. Law 16 quantifies
// over all elements and is evaluated relative to the sample.
template <sep_algebra S>
std::vector<law_result> check_laws(const S &s,
                                   const std::vector<typename S::element> &xs,
                                   bool extended = ext_sep_algebra<S>) {
  using E = typename S::element;
  const std::size_t n = xs.size();
  std::vector<law_result> out;
  auto law = [&](int k, const char *stmt) -> law_result & {
    out.push_back({k, stmt, 0, 0, {}});
    return out.back();
  };
  auto sh = [&](const E &x) { return s.show(x); };

  std::vector<char> dis(n * n);
  std::vector<E> uni(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      dis[i * n + j] = s.disjoint(xs[i], xs[j]);
      if (dis[i * n + j])
        uni[i * n + j] = s.unite(xs[i], xs[j]);
    }
  const E e = s.empty();

  {
    auto &r = law(1, "valid x -> empty ## x /\\ empty u x = x");
    for (const auto &x : xs)
      if (s.valid(x))
        detail::record(r, s.disjoint(e, x) && s.unite(e, x) == x,
                       [&] { return "x = " + sh(x); });
  }
  {
    auto &r = law(2, "x ## y -> y ## x /\\ x u y = y u x");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (dis[i * n + j])
          detail::record(r,
                         s.disjoint(xs[j], xs[i]) &&
                             uni[i * n + j] == s.unite(xs[j], xs[i]),
                         [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
  }
  {
    auto &r = law(3, "x ## y /\\ x u y ## z -> y ## z /\\ x ## y u z /\\ "
                     "x u (y u z) = (x u y) u z");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (!dis[i * n + j])
          continue;
        const E &xy = uni[i * n + j];
        for (std::size_t k = 0; k < n; ++k) {
          if (!s.disjoint(xy, xs[k]))
            continue;
          bool ok = dis[j * n + k] && s.disjoint(xs[i], uni[j * n + k]) &&
                    s.unite(xs[i], uni[j * n + k]) == s.unite(xy, xs[k]);
          detail::record(r, ok, [&] {
            return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]) + ", z = " + sh(xs[k]);
          });
        }
      }
  }
  {
    auto &r = law(4, "z ## x /\\ z ## y /\\ z u x = z u y -> x = y");
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        if (!dis[k * n + i])
          continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (!dis[k * n + j] || !(uni[k * n + i] == uni[k * n + j]))
            continue;
          detail::record(r, xs[i] == xs[j], [&] {
            return "z = " + sh(xs[k]) + ", x = " + sh(xs[i]) + ", y = " + sh(xs[j]);
          });
        }
      }
  }
  {
    auto &r = law(5, "x ## y -> valid x /\\ valid (x u y)");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (dis[i * n + j])
          detail::record(r, s.valid(xs[i]) && s.valid(uni[i * n + j]),
                         [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
  }
  {
    auto &r = law(6, "x ## y /\\ x u y = empty -> x = empty");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (dis[i * n + j] && uni[i * n + j] == e)
          detail::record(r, xs[i] == e,
                         [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
  }
  {
    auto &r = law(7, "x ## y -> x <= x u y");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (dis[i * n + j])
          detail::record(r, s.subseteq(xs[i], uni[i * n + j]),
                         [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
  }
  {
    auto &r = law(8, "x <= y -> x ## y \\ x /\\ x u (y \\ x) = y");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (s.subseteq(xs[i], xs[j])) {
          auto d = s.difference(xs[j], xs[i]);
          detail::record(r, s.disjoint(xs[i], d) && s.unite(xs[i], d) == xs[j],
                         [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
        }
  }
  if constexpr (ext_sep_algebra<S>) {
    if (!extended)
      return out;
    {
      auto &r = law(9, "x ## x -> splittable (x u x)");
      for (std::size_t i = 0; i < n; ++i)
        if (dis[i * n + i])
          detail::record(r, s.splittable(uni[i * n + i]),
                         [&] { return "x = " + sh(xs[i]); });
    }
    {
      auto &r = law(10, "splittable x -> half x ## half x /\\ half x u half x = x");
      for (const auto &x : xs)
        if (s.splittable(x)) {
          auto h = s.half(x);
          detail::record(r, s.disjoint(h, h) && s.unite(h, h) == x,
                         [&] { return "x = " + sh(x); });
        }
    }
    {
      auto &r = law(11, "splittable y /\\ x <= y -> splittable x");
      for (const auto &y : xs)
        if (s.splittable(y))
          for (const auto &x : xs)
            if (s.subseteq(x, y))
              detail::record(r, s.splittable(x),
                             [&] { return "x = " + sh(x) + ", y = " + sh(y); });
    }
    {
      auto &r = law(12, "x ## y /\\ splittable (x u y) -> half (x u y) = half x u half y");
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (dis[i * n + j] && s.splittable(uni[i * n + j])) {
            auto hx = s.half(xs[i]), hy = s.half(xs[j]);
            detail::record(r,
                           s.disjoint(hx, hy) &&
                               s.half(uni[i * n + j]) == s.unite(hx, hy),
                           [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
          }
    }
    {
      auto &r = law(13, "unmapped empty; unmapped x -> valid x");
      detail::record(r, s.unmapped(e), [&] { return "empty is mapped"; });
      for (const auto &x : xs)
        if (s.unmapped(x))
          detail::record(r, s.valid(x), [&] { return "x = " + sh(x); });
    }
    {
      auto &r = law(14, "unmapped y /\\ x <= y -> unmapped x");
      for (const auto &y : xs)
        if (s.unmapped(y))
          for (const auto &x : xs)
            if (s.subseteq(x, y))
              detail::record(r, s.unmapped(x),
                             [&] { return "x = " + sh(x) + ", y = " + sh(y); });
    }
    {
      auto &r = law(15, "x ## y /\\ unmapped x /\\ unmapped y -> unmapped (x u y)");
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (dis[i * n + j] && s.unmapped(xs[i]) && s.unmapped(xs[j]))
            detail::record(r, s.unmapped(uni[i * n + j]),
                           [&] { return "x = " + sh(xs[i]) + ", y = " + sh(xs[j]); });
    }
    {
      auto &r = law(16, "unshared x <-> valid x /\\ forall y, x ## y -> unmapped y");
      for (std::size_t i = 0; i < n; ++i) {
        bool rhs = s.valid(xs[i]);
        for (std::size_t j = 0; j < n && rhs; ++j)
          if (dis[i * n + j] && !s.unmapped(xs[j]))
            rhs = false;
        detail::record(r, s.unshared(xs[i]) == rhs,
                       [&] { return "x = " + sh(xs[i]); });
      }
    }
    {
      auto &r = law(17, "not (unshared x /\\ unmapped x)");
      for (const auto &x : xs)
        detail::record(r, !(s.unshared(x) && s.unmapped(x)),
                       [&] { return "x = " + sh(x); });
    }
    {
      auto &r = law(18, "exists x, valid x /\\ not unmapped x");
      bool found = false;
      for (const auto &x : xs)
        found = found || (s.valid(x) && !s.unmapped(x));
      detail::record(r, found, [] { return "no valid mapped element in sample"; });
    }
  }
  return out;
}

// Rationals p/q with q in {1, 2, 4} and lo <= p/q <= hi.
inline std::vector<rational> quarter_grid(rational lo, rational hi) {
  std::vector<rational> out;
  for (long long num = lo.numerator() * 4 / lo.denominator() - 1;
       rational(num, 4) <= hi; ++num) {
    rational q(num, 4);
    if (q >= lo)
      out.push_back(q);
  }
  return out;
}

// Rationals p/q with 1 <= q <= max_den and lo <= p/q <= hi, in increasing order.
inline std::vector<rational> fraction_grid(rational lo, rational hi, long long max_den) {
  std::set<rational> out;
  for (long long q = 1; q <= max_den; ++q)
    for (long long p = lo.numerator() * q / lo.denominator() - 1; rational(p, q) <= hi; ++p)
      if (rational(p, q) >= lo)
        out.insert(rational(p, q));
  return {out.begin(), out.end()};
}

} // namespace ch2o
