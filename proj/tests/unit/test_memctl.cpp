// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#include "ch2o/script.hpp"

#include <gtest/gtest.h>

using namespace ch2o;

TEST(Memctl, AUnionScriptParsesToFourStatements) {
  auto s = script::parse_script(
      "union U { int x; short y; }; let u = alloc U; write u<U:x> = 3; read u<U:y>;");
  EXPECT_EQ(s.statements.size(), 4u);
}

TEST(Memctl, AnEmptyFileIsAnEmptyScript) {
  EXPECT_TRUE(script::parse_script("").statements.empty());
  EXPECT_TRUE(script::parse_script("// only a comment\n").statements.empty());
}

TEST(Memctl, ADanglingDotIsASyntaxErrorAtTheDot) {
  try {
    script::parse_script("let u = alloc int;\nread u.");
    FAIL() << "expected a syntax error";
  } catch (const script::syntax_error &ex) {
    EXPECT_EQ(ex.line, 2u);
    EXPECT_EQ(ex.col, 7u);
  }
}

TEST(Memctl, UnknownNamesAreRejectedWhenParsing) {
  EXPECT_THROW(script::parse_script("read x;"), script::syntax_error);
  EXPECT_THROW(script::parse_script("let x = alloc struct Q;"), script::syntax_error);
  EXPECT_THROW(script::parse_script("struct S { int a; }; let s = alloc S; read s.b;"),
                  script::syntax_error);
  EXPECT_THROW(script::parse_script("let x = alloc int; expect undefined(odd) read x;"),
                  script::syntax_error);
}

TEST(Memctl, TheEmptyMemoryDump) {
  EXPECT_EQ(dump_state(mem{}), R"({"objects":{},"locks":[]})");
}

TEST(Memctl, ATombstoneDump) {
  env e;
  mem m = mem_free(1, mem_alloc(e, 1, val_new(e, int_t(sint_int)), true, {}));
  EXPECT_EQ(dump_state(m), R"({"objects":{"1":{"dead":true,"type":"signed int"}},"locks":[]})");
}

TEST(Memctl, DumpsRenderPaddingAsIndeterminateBits) {
  auto s = script::parse_script("struct S { char c; short s; }; let s = alloc S = {1, 2};");
  mem m;
  auto rep = script::run_script(s, {}, &m);
  EXPECT_TRUE(rep.ok());
  auto j = json::parse(dump_state(m));
  const auto &fields = j["objects"]["1"]["tree"]["fields"];
  EXPECT_EQ(fields[0]["tree"]["bits"].get<std::string>(), "10000000");
  EXPECT_EQ(fields[0]["pad"]["bits"].get<std::string>(), "xxxxxxxx");
  EXPECT_EQ(fields[1]["tree"]["bits"].get<std::string>(), "0100000000000000");
  EXPECT_TRUE(dump_state(m) == dump_state(m));
}

TEST(Memctl, FailedExpectationsAreReported) {
  auto s = script::parse_script("let x = alloc int = 1; expect undefined read x; read x == 2;");
  auto rep = script::run_script(s);
  EXPECT_FALSE(rep.ok());
  EXPECT_EQ(rep.failures(), 2u);
}

TEST(Memctl, RuntimeTypeErrorsAbortTheScript) {
  auto s = script::parse_script("let x = alloc signed char = 300; read x;");
  auto rep = script::run_script(s);
  EXPECT_TRUE(rep.aborted);
  EXPECT_EQ(rep.steps.size(), 1u);
}

TEST(Memctl, BigEndianImplementationsStoreBytesInReverse) {
  auto s = script::parse_script("let x = alloc short = 1; read x@1 == 1; read x@0 == 0;");
  EXPECT_TRUE(script::run_script(s, *script::impl_by_name("ilp32-be")).ok());
  EXPECT_FALSE(script::run_script(s).ok());
}
