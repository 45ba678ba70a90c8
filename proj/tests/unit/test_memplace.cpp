// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/generate.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

namespace {

const type sshort = int_t(short_int);

addr element(object_id o, std::size_t i) {
  type arr = array_t(sshort, 3);
  return {o, arr, {seg_array(0, sshort, 3)}, i * 2, sshort, ptr_to(sshort)};
}

} // namespace

TEST(Memplace, ArrayElementAddressesAndTheirReferences) {
  env e = fixture_env();
  mem_env d{{1, {array_t(sshort, 3), false}}};
  addr a = element(1, 2);
  EXPECT_TRUE(addr_typed(e, d, a));
  EXPECT_TRUE(addr_strict(e, a));
  EXPECT_TRUE(addr_ref(e, a) == ref{seg_array(2, sshort, 3)});
  EXPECT_TRUE(addr_object_offset(e, a) == 32);
  addr end = element(1, 3);
  EXPECT_TRUE(addr_typed(e, d, end));
  EXPECT_FALSE(addr_strict(e, end));
  addr past = element(1, 4);
  EXPECT_FALSE(addr_typed(e, d, past));
}

TEST(Memplace, ByteAddresses) {
  env e = fixture_env();
  addr a = element(1, 1);
  a.byte = 3;
  a.cast = ptr_to(uchar_t());
  EXPECT_TRUE(addr_is_byte(a));
  EXPECT_TRUE(addr_ref_byte(e, a) == 1);
  EXPECT_TRUE(addr_object_offset(e, a) == 24);
}

TEST(Memplace, DisjointnessOfReferencesAndAddresses) {
  env e = fixture_env();
  ref x{seg_union(0, "U", false)}, y{seg_union(1, "U", true)};
  EXPECT_FALSE(ref_disjoint(x, y));
  EXPECT_TRUE(ref_disjoint({seg_struct(0, "T")}, {seg_struct(1, "T")}));
  EXPECT_TRUE(addr_disjoint(e, element(1, 0), element(1, 1)));
  EXPECT_FALSE(addr_disjoint(e, element(1, 1), element(1, 1)));
  EXPECT_TRUE(addr_disjoint(e, element(1, 0), element(2, 0)));
}

TEST(Memplace, FreezingMakesUnionStepsFrozen) {
  ref r{seg_struct(1, "S"), seg_union(1, "U", false)};
  EXPECT_FALSE(is_frozen(r));
  EXPECT_TRUE(is_frozen(freeze(r)));
  EXPECT_TRUE(freeze(freeze(r)) == freeze(r));
}

TEST(Memplace, FunctionPointersAreTypedByTheirSignature) {
  env e = fixture_env();
  ptr f = fun_ptr("f", {int_t(sint_int)}, int_t(sint_int));
  EXPECT_TRUE(ptr_typed(e, {}, f));
  ptr g = fun_ptr("f", {sshort}, int_t(sint_int));
  EXPECT_FALSE(ptr_typed(e, {}, g));
  EXPECT_TRUE(ptr_typed(e, {}, null_ptr(ptr_to(sshort))));
}
