// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Cvalue, Flattening33AtShort) {
  env e = fixture_env();
  EXPECT_EQ(to_string(val_flatten(e, v_int(short_int, 33))), "1000010000000000");
  EXPECT_EQ(to_string(val_flatten(e, v_int(short_int, 10))), "0101000000000000");
}

TEST(Cvalue, ValueRoundtripThroughTreesFreezes) {
  env e = fixture_env();
  generator g(e, 7);
  mem m = g.memory(3, false);
  mem_env d = mem_env_of(m);
  for (int k = 0; k < 200; ++k) {
    type t = g.r.pick(fixture_object_types());
    val v = g.value(d, t);
    mtree w = of_val(e, std::vector<perm>(bit_size_of(e, t), perm_full()), v);
    EXPECT_TRUE(to_val(e, w) == freeze(v));
  }
}

TEST(Cvalue, NewValuesAreIndeterminateTrees) {
  env e = fixture_env();
  for (const type &t : fixture_object_types())
    EXPECT_TRUE(of_val(e, std::vector<perm>(bit_size_of(e, t), perm_full()), val_new(e, t)) ==
          tree_new(e, t, perm_full()));
}

TEST(Cvalue, AStoredPointerIsFrozen) {
  env e = fixture_env();
  type sh = int_t(short_int);
  addr a{1, union_t("U"), {seg_union(1, "U", false)}, 0, sh, ptr_to(sh)};
  val v = v_base(bv_ptr(addr_ptr(a)));
  val back = val_unflatten(e, ptr_t(ptr_to(sh)), val_flatten(e, v));
  ASSERT_TRUE(back.k == val::kind::base);
  EXPECT_TRUE(back.b.p.a.r == freeze(a.r));
}

TEST(Cvalue, MixedBitsReadAsAnUnsignedCharGiveAByteValue) {
  env e = fixture_env();
  std::vector<bit> bs(8, bit_of(false));
  bs[0] = bit_indet();
  base_val b = base_unflatten(e, uchar_t().base, bs);
  EXPECT_TRUE(b.k == base_val::kind::byte);
  std::vector<bit> all(8, bit_indet());
  EXPECT_TRUE(base_unflatten(e, uchar_t().base, all).k == base_val::kind::indet);
  EXPECT_TRUE(base_unflatten(e, int_t(short_int).base, std::vector<bit>(16, bit_indet())).k ==
        base_val::kind::indet);
}
