// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

namespace {

const type sint = int_t(sint_int);

addr whole(object_id o, const type &t) { return {o, t, {}, 0, t, ptr_to(t)}; }

} // namespace

TEST(Cmem, StoreThenLookup) {
  env e = fixture_env();
  mem m = mem_alloc(e, 1, val_new(e, sint), false, {});
  EXPECT_TRUE(mem_lookup(e, whole(1, sint), m) == v_base(bv_indet(sint.base)));
  auto m2 = mem_insert(e, whole(1, sint), v_int(sint_int, 5), m);
  ASSERT_TRUE(m2);
  EXPECT_TRUE(mem_lookup(e, whole(1, sint), *m2) == v_int(sint_int, 5));
}

TEST(Cmem, LockedObjectsCannotBeAccessedUntilUnlocked) {
  env e = fixture_env();
  mem m = mem_alloc(e, 1, v_int(sint_int, 1), false, {});
  auto m2 = mem_lock(e, whole(1, sint), m);
  ASSERT_TRUE(m2);
  EXPECT_FALSE(mem_lookup(e, whole(1, sint), *m2));
  EXPECT_TRUE(read_failure(e, whole(1, sint), *m2) == ub_reason::locked);
  EXPECT_TRUE(write_failure(e, whole(1, sint), *m2) == ub_reason::locked);
  EXPECT_TRUE(mem_locks(*m2).size() == 32);
  EXPECT_TRUE(mem_unlock(mem_locks(*m2), *m2) == m);
  EXPECT_TRUE(mem_unlock(lock_singleton(e, whole(1, sint)), *m2) == m);
}

TEST(Cmem, FreeingMallocedArrays) {
  env e = fixture_env();
  type arr = array_t(sint, 2);
  mem m = mem_alloc(e, 1, val_new(e, arr), true, {});
  addr first{1, arr, {seg_array(0, sint, 2)}, 0, sint, ptr_to(sint)};
  EXPECT_TRUE(mem_freeable(e, first, m));
  EXPECT_FALSE(mem_freeable(e, whole(1, arr), m));
  mem f = mem_free(1, m);
  EXPECT_FALSE(f.live(1));
  EXPECT_TRUE(read_failure(e, first, f) == ub_reason::dead_object);
  mem n = mem_alloc(e, 1, val_new(e, arr), false, {});
  EXPECT_FALSE(mem_freeable(e, first, n));
}

TEST(Cmem, ByteStoresSpliceIntoTheObject) {
  env e = fixture_env();
  mem m = mem_alloc(e, 1, v_int(sint_int, 0), false, {});
  addr b = whole(1, sint);
  b.byte = 1;
  b.cast = ptr_to(uchar_t());
  auto m2 = mem_insert(e, b, v_int(uchar_int, 1), m);
  ASSERT_TRUE(m2);
  EXPECT_TRUE(mem_lookup(e, whole(1, sint), *m2) == v_int(sint_int, 256));
}

TEST(Cmem, EndOfArrayAndEffectiveTypeFailures) {
  env e = fixture_env();
  type sh = int_t(short_int), arr = array_t(sh, 3);
  mem m = mem_alloc(e, 1, val_new(e, arr), false, {});
  addr end{1, arr, {seg_array(0, sh, 3)}, 6, sh, ptr_to(sh)};
  EXPECT_TRUE(read_failure(e, end, m) == ub_reason::end_of_array);
  mem u = mem_alloc(e, 1, v_union("U", 0, v_int(sint_int, 3)), false, {});
  addr y{1, union_t("U"), {seg_union(1, "U", true)}, 0, sh, ptr_to(sh)};
  EXPECT_TRUE(read_failure(e, y, u) == ub_reason::effective_types);
  y.r = {seg_union(1, "U", false)};
  EXPECT_FALSE(read_failure(e, y, u));
}

TEST(Cmem, GeneratedMemoriesAreValid) {
  env e = fixture_env();
  generator g(e, 3);
  for (int k = 0; k < 100; ++k) {
    mem m = g.memory(4);
    EXPECT_TRUE(mem_valid(e, mem_env_of(m), m));
  }
}
