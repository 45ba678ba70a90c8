// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/ctypes.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace ch2o;

namespace {

const int_type sshort{signedness::is_signed, int_rank::short_rank};

std::string bits_text(const std::vector<bool> &bs) {
  std::string s;
  for (bool b : bs)
    s += b ? '1' : '0';
  return s;
}

} // namespace

TEST(Ctypes, IntegerEncodingsAreLeastSignificantBitFirst) {
  impl_env ie;
  EXPECT_EQ(bits_text(int_to_bits(ie, sshort, 33)), "1000010000000000");
  EXPECT_EQ(bits_text(int_to_bits(ie, sshort, 10)), "0101000000000000");
  EXPECT_EQ(bits_text(int_to_bits(ie, sshort, -1)), "1111111111111111");
  EXPECT_TRUE(int_of_bits(ie, sshort, int_to_bits(ie, sshort, -32768)) == -32768);
}

TEST(Ctypes, BigEndianSwapsBytesNotBits) {
  impl_env ie;
  ie.endian = endianness::big;
  EXPECT_EQ(bits_text(int_to_bits(ie, sshort, 33)), "0000000010000100");
  EXPECT_TRUE(int_of_bits(ie, sshort, int_to_bits(ie, sshort, 33)) == 33);
}

TEST(Ctypes, IntegerRanges) {
  impl_env ie;
  EXPECT_TRUE(int_min(ie, schar_int) == -128);
  EXPECT_TRUE(int_upper(ie, uchar_int) == 256);
  EXPECT_TRUE(int_typed(ie, 255, uchar_int));
  EXPECT_FALSE(int_typed(ie, 256, uchar_int));
  EXPECT_THROW(int_to_bits(ie, uchar_int, 256), error);
}

TEST(Ctypes, StructLayoutPadsToAlignment) {
  env e;
  type s = int_t(sshort);
  e.declare("P", {s, ptr_t(ptr_to(s))});
  const auto &l = layout_of(e, struct_t("P"));
  EXPECT_EQ(l.field_sizes, (std::vector<std::size_t>{4, 4}));
  EXPECT_TRUE(size_of(e, struct_t("P")) == 8);
  EXPECT_EQ(field_bit_sizes(e, struct_t("P")), (std::vector<std::size_t>{32, 32}));
  e.declare("U", {int_t(sint_int), s});
  EXPECT_TRUE(size_of(e, union_t("U")) == 4);
  EXPECT_TRUE(size_of(e, array_t(s, 3)) == 6);
}

TEST(Ctypes, EnvironmentsRejectUnknownAndDirectlyRecursiveCompounds) {
  env e;
  EXPECT_FALSE(type_valid(e.types, struct_t("missing")));
  e.declare("L", {int_t(sint_int), ptr_t(ptr_to(struct_t("L")))});
  EXPECT_TRUE(env_valid(e.types));
  e.declare("R", {struct_t("R")});
  EXPECT_FALSE(env_valid(e.types));
}
