// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/perm.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Perm, PermissionKinds) {
  EXPECT_TRUE(kind_of(perm_full()) == perm_kind::writable);
  EXPECT_TRUE(kind_of(perm_half(perm_full())) == perm_kind::readable);
  EXPECT_TRUE(kind_of(perm_token()) == perm_kind::existing);
  EXPECT_TRUE(kind_of(perm_empty()) == perm_kind::none);
  EXPECT_TRUE(kind_of(perm_const(1)) == perm_kind::readable);
  EXPECT_TRUE(kind_of(perm_lock(perm_full())) == perm_kind::locked);
}

TEST(Perm, LockingAndUnlockingAWritablePermission) {
  perm l = perm_lock(perm_full());
  EXPECT_TRUE(perm_unlock(l) == perm_full());
  EXPECT_FALSE(kind_le(perm_kind::readable, perm_kind::locked));
  EXPECT_TRUE(kind_le(perm_kind::locked, perm_kind::writable));
  EXPECT_FALSE(kind_le(perm_kind::locked, perm_kind::readable));
}

TEST(Perm, TheTokenSplitsOffAFullPermission) {
  perm rest = perm_algebra.difference(perm_full(), perm_token());
  EXPECT_TRUE(perm_algebra.disjoint(rest, perm_token()));
  EXPECT_TRUE(perm_algebra.unite(rest, perm_token()) == perm_full());
  EXPECT_TRUE(kind_of(rest) == perm_kind::writable);
}

TEST(Perm, AllClausesOfThePermissionLemmaHoldOnTheCarrier) {
  auto rs = check_perm_lemma(perm_carrier());
  ASSERT_TRUE(rs.size() == 6);
  for (const auto &r : rs) {
    SCOPED_TRACE(testing::Message() << "clause " << r.clause << ": " << r.witness);
    EXPECT_TRUE(r.checked > 0);
    EXPECT_EQ(r.failures, 0u);
  }
}
