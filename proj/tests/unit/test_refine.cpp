// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"
#include "ch2o/refine.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Refine, MemoriesRefineThemselvesUnderTheIdentity) {
  env e = fixture_env();
  generator g(e, 5);
  for (int k = 0; k < 100; ++k) {
    mem m = g.memory(4);
    EXPECT_TRUE(mem_refine(e, renaming_id(m), m, m));
  }
}

TEST(Refine, IndeterminateValuesRefineConcreteOnesButNotConversely) {
  env e = fixture_env();
  type sint = int_t(sint_int);
  mem a = mem_alloc(e, 1, val_new(e, sint), false, {});
  mem b = mem_alloc(e, 1, v_int(sint_int, 4), false, {});
  EXPECT_TRUE(mem_refine(e, renaming_id(a), a, b));
  EXPECT_FALSE(mem_refine(e, renaming_id(b), b, a));
}

TEST(Refine, AUnionInKnownVariantRefinesToUnknownVariant) {
  env e = fixture_env();
  mtree w = of_val(e, std::vector<perm>(32, perm_full()), v_union("U", 0, v_int(sint_int, 3)));
  mtree all = tree_union_all("U", tree_flatten(w));
  mem_env d;
  EXPECT_TRUE(tree_refine(e, renaming_id(d), d, d, w, all, union_t("U")));
  EXPECT_FALSE(tree_refine(e, renaming_id(d), d, d, all, w, union_t("U")));
}

TEST(Refine, SharedUnionsDoNotRefineToUnknownVariant) {
  env e = fixture_env();
  mtree w = of_val(e, std::vector<perm>(32, perm_half(perm_full())),
                   v_union("U", 1, v_int(short_int, 3)));
  mtree all = tree_union_all("U", tree_flatten(w));
  mem_env d;
  EXPECT_FALSE(tree_refine(e, renaming_id(d), d, d, w, all, union_t("U")));
}

TEST(Refine, RenamingsCompose) {
  env e = fixture_env();
  type sint = int_t(sint_int);
  mem m = mem_alloc(e, 1, v_int(sint_int, 4), false, {});
  mem m2 = mem_alloc(e, 5, v_int(sint_int, 4), false, {});
  mem m3 = mem_alloc(e, 9, v_int(sint_int, 4), false, {});
  renaming f{{1, {5, {}}}}, g{{5, {9, {}}}};
  ASSERT_TRUE(mem_refine(e, f, m, m2));
  ASSERT_TRUE(mem_refine(e, g, m2, m3));
  EXPECT_TRUE(mem_refine(e, renaming_compose(g, f), m, m3));
  EXPECT_TRUE(renaming_compose(g, f).at(1).first == 9);
  (void)sint;
}

TEST(Refine, ForcingAFrozenAddressRefinesTheOriginalMemory) {
  env e = fixture_env();
  type sh = int_t(short_int);
  mem m = mem_alloc(e, 1, v_union("U", 1, v_int(short_int, 2)), false, {});
  addr a{1, union_t("U"), {seg_union(1, "U", true)}, 0, sh, ptr_to(sh)};
  auto mf = mem_force(e, a, m);
  ASSERT_TRUE(mf);
  EXPECT_TRUE(mem_refine(e, renaming_id(m), *mf, m));
}
