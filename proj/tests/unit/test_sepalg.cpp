// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/perm.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

namespace {

template <class S, class V> std::size_t law_failures(const S &s, const V &xs, int law) {
  for (const auto &r : check_laws(s, xs))
    if (r.law == law)
      return r.failures;
  return 0;
}

template <class S, class V> bool all_laws_hold(const S &s, const V &xs) {
  for (const auto &r : check_laws(s, xs))
    if (r.failures != 0 || r.checked == 0)
      return false;
  return true;
}

} // namespace

TEST(Sepalg, FractionsUniteBelowOne) {
  frac_sa f;
  EXPECT_TRUE(f.disjoint(rational(1, 2), rational(1, 2)));
  EXPECT_FALSE(f.disjoint(rational(3, 4), rational(1, 2)));
  EXPECT_TRUE(f.unite(rational(1, 4), rational(1, 2)) == rational(3, 4));
  EXPECT_TRUE(f.subseteq(rational(1, 4), rational(1, 2)));
  EXPECT_TRUE(f.difference(rational(1, 2), rational(1, 4)) == rational(1, 4));
  EXPECT_TRUE(f.unshared(rational(1)));
  EXPECT_TRUE(f.unmapped(rational(0)));
}

TEST(Sepalg, CountingTracksOutstandingTokens) {
  counting_sa<frac_sa> c;
  counting_sa<frac_sa>::element full{0, 1}, token{-1, 0}, rest{1, 1};
  EXPECT_TRUE(c.valid(full));
  EXPECT_TRUE(c.valid(token));
  EXPECT_TRUE(c.valid(rest));
  EXPECT_TRUE(c.disjoint(rest, token));
  EXPECT_TRUE(c.unite(rest, token) == full);
}

TEST(Sepalg, LockedElementsAreDisjointOnlyFromTheEmptyElement) {
  lockable_sa<counting_sa<frac_sa>> l;
  decltype(l)::element locked{true, {0, 1}};
  EXPECT_TRUE(l.valid(locked));
  EXPECT_TRUE(l.disjoint(locked, l.empty()));
  EXPECT_FALSE(l.disjoint(locked, decltype(l)::element{false, {0, rational(1, 2)}}));
}

TEST(Sepalg, BoolAndFractionCarriersSatisfyAllLaws) {
  EXPECT_TRUE(all_laws_hold(bool_sa{}, std::vector<bool>{false, true}));
  EXPECT_TRUE(all_laws_hold(frac_sa{}, quarter_grid(rational(-1, 2), rational(3, 2))));
}

TEST(Sepalg, ThePermissionCarrierSatisfiesAllLaws) {
  EXPECT_TRUE(all_laws_hold(perm_algebra, perm_carrier()));
}

TEST(Sepalg, SplittingOnlyTheEmptyRightElementBreaksTheSplittingLaws) {
  sum_sa<lockable_sa<counting_sa<frac_sa>>, frac_sa, sum_split_rule::empty_only> s;
  EXPECT_TRUE(law_failures(s, perm_carrier(), 9) > 0);
  EXPECT_TRUE(law_failures(s, perm_carrier(), 10) > 0);
  EXPECT_TRUE(law_failures(perm_algebra, perm_carrier(), 9) == 0);
  EXPECT_TRUE(law_failures(perm_algebra, perm_carrier(), 10) == 0);
}

TEST(Sepalg, ListDisjointness) {
  frac_sa f;
  std::vector<rational> xs{rational(1, 4), rational(1, 2)}, ys{rational(3, 4)};
  EXPECT_TRUE(list_disjoint(f, xs));
  EXPECT_FALSE(list_disjoint(f, std::vector<rational>{rational(3, 4), rational(1, 2)}));
  EXPECT_TRUE(list_union(f, xs) == rational(3, 4));
  auto sample = quarter_grid(rational(0), rational(1));
  EXPECT_TRUE(list_disjoint_equiv(f, xs, ys, sample));
  EXPECT_FALSE(list_disjoint_le(f, std::vector<rational>{rational(1, 4)}, ys, sample));
}
