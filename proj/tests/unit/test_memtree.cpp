// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Memtree, NewTreesHaveTheShapeOfTheirType) {
  env e = fixture_env();
  mtree w = tree_new(e, struct_t("S"), perm_full());
  EXPECT_TRUE(type_of(w) == struct_t("S"));
  EXPECT_TRUE(tree_flatten(w).size() == bit_size_of(e, struct_t("S")));
  EXPECT_TRUE(tree_typed(e, {}, w, struct_t("S")));
  EXPECT_TRUE(all_indet(tree_flatten(w)));
}

TEST(Memtree, UnflatteningAUnionForgetsItsVariant) {
  env e = fixture_env();
  val v = v_union("U", 1, v_int(short_int, 7));
  mtree w = of_val(e, std::vector<perm>(32, perm_full()), v);
  EXPECT_TRUE(w.k == mtree::kind::union_);
  mtree u = tree_unflatten(e, union_t("U"), tree_flatten(w));
  EXPECT_TRUE(u.k == mtree::kind::union_all);
  EXPECT_TRUE(tree_flatten(u) == tree_flatten(w));
}

TEST(Memtree, StructPaddingIsIndeterminateAfterUnflattening) {
  env e = fixture_env();
  std::vector<pbit> xs(bit_size_of(e, struct_t("P")), make_pbit(perm_full(), bit_of(true)));
  mtree w = tree_unflatten(e, struct_t("P"), xs);
  ASSERT_TRUE(w.k == mtree::kind::struct_);
  EXPECT_TRUE(all_indet(w.pads[0]));
  EXPECT_TRUE(w.pads[0].size() == 16);
  EXPECT_FALSE(tree_typed(e, {}, tree_unflatten(e, struct_t("P"), xs), struct_t("S")));
}

TEST(Memtree, LookupsThroughAnotherVariantReinterpretTheBits) {
  env e = fixture_env();
  val v = v_union("U", 0, v_int(sint_int, 33));
  mtree w = of_val(e, std::vector<perm>(32, perm_full()), v);
  auto y = tree_lookup(e, {seg_union(1, "U", false)}, w);
  ASSERT_TRUE(y);
  EXPECT_EQ(to_string(bits_of(tree_flatten(*y))), "1000010000000000");
  EXPECT_FALSE(tree_lookup(e, {seg_union(1, "U", true)}, w));
}

TEST(Memtree, AlteringThroughAnotherVariantSwitchesIt) {
  env e = fixture_env();
  val v = v_union("U", 0, v_int(sint_int, 33));
  mtree w = of_val(e, std::vector<perm>(32, perm_full()), v);
  auto w2 = tree_alter(e, [](const mtree &x) { return x; }, {seg_union(1, "U", false)}, w);
  ASSERT_TRUE(w2);
  EXPECT_TRUE(w2->k == mtree::kind::union_);
  EXPECT_EQ(w2->variant, 1u);
  EXPECT_TRUE(all_indet(w2->bits));
}
