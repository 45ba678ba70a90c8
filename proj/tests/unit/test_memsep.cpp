// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Memsep, SplitMemoriesAreDisjointAndUniteToTheOriginal) {
  env e = fixture_env();
  generator g(e, 11);
  mem_sa s;
  for (int k = 0; k < 100; ++k) {
    mem m = g.memory(4);
    auto [a, b] = split_mem(g.r, m);
    EXPECT_TRUE(s.valid(a));
    EXPECT_TRUE(s.valid(b));
    EXPECT_TRUE(s.disjoint(a, b));
    EXPECT_TRUE(s.unite(a, b) == m);
    EXPECT_TRUE(s.subseteq(a, m));
    EXPECT_TRUE(s.difference(m, a) == b);
  }
}

TEST(Memsep, ReadOnlyHalvesOfAnObjectUniteToIt) {
  env e = fixture_env();
  mem m = mem_alloc(e, 1, v_int(sint_int, 9), false, {});
  mem h = m;
  auto &l = std::get<live_object>(h.cells[1]);
  l.tree = tree_map([](const pbit &x) { return make_pbit(perm_half(x.value), x.tag); }, l.tree);
  mem_sa s;
  EXPECT_TRUE(s.disjoint(h, h));
  EXPECT_TRUE(s.unite(h, h) == m);
  EXPECT_FALSE(mem_writable(e, {1, int_t(sint_int), {}, 0, int_t(sint_int), ptr_to(int_t(sint_int))}, h));
}

TEST(Memsep, TombstonesAreNotDisjointFromEachOther) {
  env e = fixture_env();
  mem m = mem_free(1, mem_alloc(e, 1, v_int(sint_int, 9), false, {}));
  mem_sa s;
  EXPECT_FALSE(s.disjoint(m, m));
  EXPECT_TRUE(s.disjoint(m, mem{}));
}

TEST(Memsep, TheTreeAlgebraHasTheNewTreeAsItsUnit) {
  env e = fixture_env();
  auto s = tree_sa(e, union_t("U"));
  mtree w = of_val(e, std::vector<perm>(32, perm_full()), v_union("U", 1, v_int(short_int, 2)));
  EXPECT_TRUE(s.disjoint(s.empty(), w));
  EXPECT_TRUE(s.unite(s.empty(), w) == w);
}
