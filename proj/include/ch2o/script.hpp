// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

#pragma once

#include "ch2o/render.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ch2o::script {

// A parse error at a position in the script text. Lines and columns count
// from 1.
struct syntax_error : error {
  std::size_t line, col;
  syntax_error(std::size_t l, std::size_t c, const std::string &msg)
      : error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
        line(l), col(c) {}
};

struct token {
  enum class kind { ident, number, punct, end };
  kind k = kind::end;
  std::string text;
  std::size_t line = 1, col = 1, offset = 0;
};

namespace detail {

inline std::vector<token> lex(const std::string &src) {
  std::vector<token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n')
        advance(1);
      continue;
    }
    token t;
    t.line = line;
    t.col = col;
    t.offset = i;
    std::size_t j = i;
    if (std::isalpha(c) || c == '_') {
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.k = token::kind::ident;
    } else if (std::isdigit(c)) {
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      t.k = token::kind::number;
    } else {
      t.k = token::kind::punct;
      j = i + 1;
      std::string two = src.substr(i, 2);
      if (two == "==" || two == "->")
        j = i + 2;
      else if (std::string("{}()[]<>:;,.=*&@-").find(static_cast<char>(c)) == std::string::npos)
        throw syntax_error(line, col, std::string("unexpected character '") +
                                          static_cast<char>(c) + "'");
    }
    t.text = src.substr(i, j - i);
    advance(j - i);
    out.push_back(std::move(t));
  }
  token end;
  end.line = line;
  end.col = col;
  end.offset = src.size();
  out.push_back(end);
  return out;
}

} // namespace detail

// One step of a path: a struct field or union variant selected by name, an
// explicitly tagged union variant, an array index, or a byte offset.
struct path_step {
  enum class kind { field, variant, index, byte };
  kind k = kind::field;
  std::size_t i = 0;
};

// An lvalue: a variable or the dereference of a stored pointer, followed by
// steps. `t` is the type the path designates.
struct path {
  std::string var;
  std::shared_ptr<const path> deref;
  std::vector<path_step> steps;
  type t{};
};

struct value_expr {
  enum class kind { number, indet, null, addr_of, function, list, designated };
  kind k = kind::indet;
  integer x;
  std::shared_ptr<const path> p;
  std::string name;
  std::vector<value_expr> items;
  std::vector<std::string> names;
};

struct statement {
  enum class kind {
    declare,
    function,
    impl,
    let,
    read,
    peek,
    force,
    lock,
    write,
    store,
    unlock,
    free,
    checkpoint,
    assert_memory,
    dump,
    expect,
  };
  kind k = kind::dump;
  std::size_t line = 1, col = 1;
  std::string text;

  // Declarations: `tag` with field types and names, or a function `tag`.
  bool is_union = false;
  std::string tag;
  std::vector<type> fields;
  std::vector<std::string> names;
  type ret{};

  // let: the variable `tag` of type `ret`.
  bool malloced = false, konst = false;

  std::optional<path> p;
  std::optional<value_expr> v;

  // expect: the expected outcome of `inner`.
  bool expect_defined = true;
  std::optional<ub_reason> reason;
  std::shared_ptr<const statement> inner;
};

struct script {
  std::vector<statement> statements;
};

namespace detail {

struct compound_info {
  bool is_union = false;
  std::vector<std::string> names;
  std::vector<type> fields;
};

class parser {
public:
  explicit parser(const std::string &src) : src_(src), toks_(lex(src)) {}

  script run() {
    script s;
    while (peek().k != token::kind::end)
      s.statements.push_back(statement_());
    return s;
  }

private:
  const std::string &src_;
  std::vector<token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, compound_info> tags_;
  std::map<std::string, type> vars_;
  std::map<std::string, std::pair<std::vector<type>, type>> functions_;

  const token &peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const token &next() {
    const token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  [[noreturn]] void fail(const token &t, const std::string &msg) const {
    throw syntax_error(t.line, t.col, msg);
  }
  static std::string describe(const token &t) {
    return t.k == token::kind::end ? "end of input" : "'" + t.text + "'";
  }
  bool at(const std::string &s) const {
    return peek().k != token::kind::end && peek().k != token::kind::number &&
           peek().text == s;
  }
  bool accept(const std::string &s) {
    if (!at(s))
      return false;
    next();
    return true;
  }
  const token &expect(const std::string &s) {
    if (!at(s))
      fail(peek(), "expected '" + s + "', found " + describe(peek()));
    return next();
  }
  std::string ident(const std::string &what) {
    if (peek().k != token::kind::ident)
      fail(peek(), "expected " + what + ", found " + describe(peek()));
    return next().text;
  }
  std::size_t number(const std::string &what) {
    if (peek().k != token::kind::number)
      fail(peek(), "expected " + what + ", found " + describe(peek()));
    const token &t = next();
    try {
      return std::stoull(t.text);
    } catch (const std::exception &) {
      fail(t, "number out of range");
    }
  }

  type compound_type(const token &at_tok, const std::string &tag) const {
    auto it = tags_.find(tag);
    if (it == tags_.end())
      fail(at_tok, "unknown struct or union '" + tag + "'");
    return it->second.is_union ? union_t(tag) : struct_t(tag);
  }

  // A type specifier followed by pointer stars.
  type type_() {
    const token &start = peek();
    std::optional<type> t;
    bool any = false;
    if (accept("void")) {
      any = true;
    } else if (at("struct") || at("union")) {
      bool u = next().text == "union";
      const token &tt = peek();
      std::string tag = ident("a tag");
      t = compound_type(tt, tag);
      if (t->is_union() != u)
        fail(tt, "'" + tag + "' is declared as a " + (u ? "struct" : "union"));
    } else if (accept("fn")) {
      expect("(");
      std::vector<type> args;
      if (!at(")"))
        do
          args.push_back(type_());
        while (accept(","));
      expect(")");
      expect("->");
      type ret = type_();
      expect("*");
      t = ptr_t(ptr_fun(args, ret));
    } else if (at("signed") || at("unsigned") || at("char") || at("short") || at("int") ||
               at("long")) {
      signedness sg = signedness::is_signed;
      if (at("signed") || at("unsigned"))
        sg = next().text == "unsigned" ? signedness::is_unsigned : signedness::is_signed;
      int_rank rk = int_rank::int_rank;
      if (accept("char"))
        rk = int_rank::char_rank;
      else if (accept("short"))
        rk = int_rank::short_rank, accept("int");
      else if (accept("long"))
        rk = accept("long") ? int_rank::long_long_rank : int_rank::long_rank, accept("int");
      else
        accept("int");
      t = int_t({sg, rk});
    } else if (peek().k == token::kind::ident && tags_.count(peek().text)) {
      t = compound_type(peek(), next().text);
    } else {
      fail(start, "expected a type, found " + describe(start));
    }
    if (any) {
      if (!accept("*"))
        fail(peek(), "void is only allowed as a pointer target");
      t = ptr_t(ptr_any());
    }
    while (accept("*"))
      t = ptr_t(ptr_to(*t));
    return *t;
  }

  type dims(type t) {
    std::vector<std::size_t> ns;
    while (accept("[")) {
      std::size_t n = number("an array length");
      if (n == 0)
        fail(toks_[pos_ - 1], "array length must be positive");
      ns.push_back(n);
      expect("]");
    }
    for (auto it = ns.rbegin(); it != ns.rend(); ++it)
      t = array_t(t, *it);
    return t;
  }

  std::string text_from(const token &start) const {
    return src_.substr(start.offset, toks_[pos_ - 1].offset + toks_[pos_ - 1].text.size() -
                                         start.offset);
  }

  statement statement_() {
    const token &start = peek();
    statement s;
    s.line = start.line;
    s.col = start.col;
    if ((at("struct") || at("union")) && peek(2).text == "{") {
      declaration(s);
    } else if (accept("fn")) {
      s.k = statement::kind::function;
      const token &nt = peek();
      s.tag = ident("a function name");
      if (functions_.count(s.tag))
        fail(nt, "function '" + s.tag + "' is already declared");
      expect("(");
      if (!at(")"))
        do
          s.fields.push_back(type_());
        while (accept(","));
      expect(")");
      expect("->");
      s.ret = type_();
      expect(";");
      functions_[s.tag] = {s.fields, s.ret};
    } else if (accept("impl")) {
      s.k = statement::kind::impl;
      s.tag = ident("an implementation name");
      expect(";");
    } else if (accept("let")) {
      s.k = statement::kind::let;
      const token &nt = peek();
      s.tag = ident("a variable name");
      if (vars_.count(s.tag))
        fail(nt, "variable '" + s.tag + "' is already defined");
      expect("=");
      if (accept("malloc"))
        s.malloced = true;
      else if (!accept("alloc"))
        fail(peek(), "expected 'alloc' or 'malloc', found " + describe(peek()));
      s.konst = accept("const");
      s.ret = dims(type_());
      if (accept("="))
        s.v = value_();
      expect(";");
      vars_[s.tag] = s.ret;
    } else if (accept("checkpoint")) {
      s.k = statement::kind::checkpoint;
      s.tag = ident("a checkpoint name");
      expect(";");
    } else if (accept("assert")) {
      s.k = statement::kind::assert_memory;
      expect("memory");
      expect("==");
      s.tag = ident("a checkpoint name");
      expect(";");
    } else if (accept("dump")) {
      s.k = statement::kind::dump;
      expect(";");
    } else if (accept("expect")) {
      s.k = statement::kind::expect;
      if (accept("undefined")) {
        s.expect_defined = false;
        if (accept("(")) {
          const token &rt = peek();
          std::string r = ident("a reason");
          while (accept("-"))
            r += "-" + ident("a reason");
          s.reason = ub_reason_of(r);
          if (!s.reason)
            fail(rt, "unknown reason '" + r + "'");
          expect(")");
        }
      } else if (!accept("defined")) {
        fail(peek(), "expected 'defined' or 'undefined', found " + describe(peek()));
      }
      statement inner;
      inner.line = peek().line;
      inner.col = peek().col;
      if (!access(inner))
        fail(peek(), "expected an access statement, found " + describe(peek()));
      s.inner = std::make_shared<statement>(std::move(inner));
    } else if (!access(s)) {
      fail(start, "expected a statement, found " + describe(start));
    }
    s.text = text_from(start);
    return s;
  }

  void declaration(statement &s) {
    s.k = statement::kind::declare;
    s.is_union = next().text == "union";
    const token &tt = peek();
    s.tag = ident("a tag");
    if (tags_.count(s.tag))
      fail(tt, "'" + s.tag + "' is already declared");
    tags_[s.tag] = {s.is_union, {}, {}};
    expect("{");
    while (!accept("}")) {
      type base = type_();
      do {
        type t = base;
        while (accept("*"))
          t = ptr_t(ptr_to(t));
        const token &ft = peek();
        std::string name = ident("a field name");
        for (const auto &n : s.names)
          if (n == name)
            fail(ft, "duplicate field '" + name + "'");
        s.names.push_back(name);
        s.fields.push_back(dims(t));
      } while (accept(","));
      expect(";");
    }
    if (s.fields.empty())
      fail(tt, "'" + s.tag + "' has no fields");
    expect(";");
    tags_[s.tag] = {s.is_union, s.names, s.fields};
  }

  bool access(statement &s) {
    static const std::map<std::string, statement::kind> kinds = {
        {"read", statement::kind::read},   {"peek", statement::kind::peek},
        {"force", statement::kind::force}, {"lock", statement::kind::lock},
        {"write", statement::kind::write}, {"store", statement::kind::store},
        {"unlock", statement::kind::unlock}, {"free", statement::kind::free},
    };
    if (peek().k != token::kind::ident || !kinds.count(peek().text))
      return false;
    s.k = kinds.at(next().text);
    const token &start = toks_[pos_ - 1];
    if (s.k == statement::kind::unlock && accept(";")) {
      s.text = text_from(start);
      return true;
    }
    s.p = path_();
    if (s.k == statement::kind::write || s.k == statement::kind::store) {
      expect("=");
      s.v = value_();
    } else if ((s.k == statement::kind::read || s.k == statement::kind::peek) && accept("==")) {
      s.v = value_();
    }
    expect(";");
    s.text = text_from(start);
    return true;
  }

  path path_() {
    if (at("*")) {
      const token &st = next();
      path inner = path_();
      if (!inner.t.is_base() || inner.t.base.k != base_type::kind::pointer ||
          inner.t.base.ptr->k != ptr_type::kind::to)
        fail(st, "cannot dereference a value of type " + to_string(inner.t));
      path p;
      p.t = *inner.t.base.ptr->target;
      p.deref = std::make_shared<path>(std::move(inner));
      return p;
    }
    path p;
    if (accept("(")) {
      p = path_();
      expect(")");
    } else {
      const token &vt = peek();
      p.var = ident("a variable");
      auto it = vars_.find(p.var);
      if (it == vars_.end())
        fail(vt, "unknown variable '" + p.var + "'");
      p.t = it->second;
    }
    for (;;) {
      if (!p.steps.empty() && p.steps.back().k == path_step::kind::byte &&
          (at(".") || at("<") || at("[") || at("@")))
        fail(peek(), "no steps may follow a byte offset");
      if (at(".")) {
        const token &dot = next();
        if (peek().k != token::kind::ident)
          fail(dot, "expected a field name after '.'");
        const token &ft = next();
        if (!p.t.is_struct() && !p.t.is_union())
          fail(dot, "type " + to_string(p.t) + " has no fields");
        const auto &info = tags_.at(p.t.tag);
        std::size_t i = field_index(info, ft);
        p.steps.push_back({path_step::kind::field, i});
        p.t = info.fields[i];
      } else if (at("<")) {
        const token &lt = next();
        std::string tag = ident("a union tag");
        expect(":");
        const token &ft = peek();
        ident("a variant name");
        expect(">");
        if (!p.t.is_union() || p.t.tag != tag)
          fail(lt, "type " + to_string(p.t) + " is not union " + tag);
        const auto &info = tags_.at(tag);
        std::size_t i = field_index(info, ft);
        p.steps.push_back({path_step::kind::variant, i});
        p.t = info.fields[i];
      } else if (at("[")) {
        const token &bt = next();
        std::size_t i = number("an index");
        expect("]");
        if (!p.t.is_array())
          fail(bt, "type " + to_string(p.t) + " is not an array");
        if (i > p.t.n)
          fail(bt, "index " + std::to_string(i) + " is past the end of " + to_string(p.t));
        p.steps.push_back({path_step::kind::index, i});
        p.t = p.t.element();
      } else if (accept("@")) {
        p.steps.push_back({path_step::kind::byte, number("a byte offset")});
        p.t = uchar_t();
      } else {
        return p;
      }
    }
  }

  std::size_t field_index(const compound_info &info, const token &ft) const {
    for (std::size_t i = 0; i < info.names.size(); ++i)
      if (info.names[i] == ft.text)
        return i;
    fail(ft, "no field '" + ft.text + "'");
  }

  value_expr value_() {
    value_expr v;
    if (at("-") || peek().k == token::kind::number) {
      bool neg = accept("-");
      if (peek().k != token::kind::number)
        fail(peek(), "expected a number, found " + describe(peek()));
      v.k = value_expr::kind::number;
      v.x = integer(next().text);
      if (neg)
        v.x = -v.x;
    } else if (accept("indet")) {
      v.k = value_expr::kind::indet;
    } else if (accept("null")) {
      v.k = value_expr::kind::null;
    } else if (accept("&")) {
      if (peek().k == token::kind::ident && functions_.count(peek().text) &&
          !vars_.count(peek().text)) {
        v.k = value_expr::kind::function;
        v.name = next().text;
      } else {
        v.k = value_expr::kind::addr_of;
        v.p = std::make_shared<path>(path_());
      }
    } else if (accept("{")) {
      v.k = at(".") ? value_expr::kind::designated : value_expr::kind::list;
      if (!at("}"))
        do {
          if (v.k == value_expr::kind::designated) {
            expect(".");
            v.names.push_back(ident("a field name"));
            expect("=");
          }
          v.items.push_back(value_());
        } while (accept(","));
      expect("}");
    } else {
      fail(peek(), "expected a value, found " + describe(peek()));
    }
    return v;
  }
};

} // namespace detail

// Parses a script. Throws syntax_error at the first error.
inline script parse_script(const std::string &text) {
  return detail::parser(text).run();
}

// Named implementation environments: `ilp32` (the default, little endian),
// `ilp32-be` (big endian), `lp64` (8-byte longs and pointers) and `uchar`
// (unsigned plain char).
inline std::optional<impl_env> impl_by_name(const std::string &name) {
  impl_env ie;
  if (name == "ilp32")
    return ie;
  if (name == "ilp32-be") {
    ie.endian = endianness::big;
    return ie;
  }
  if (name == "lp64") {
    ie.rank_sizes[3] = 8;
    ie.ptr_size = 8;
    return ie;
  }
  if (name == "uchar") {
    ie.char_signed = false;
    return ie;
  }
  return std::nullopt;
}

// Reads an implementation environment from JSON. Missing keys keep the
// defaults of `ilp32`.
inline impl_env impl_from_json(const json &j) {
  impl_env ie;
  if (!j.is_object())
    throw error("impl: expected a JSON object");
  ie.char_bits = j.value("char_bits", ie.char_bits);
  ie.char_signed = j.value("char_signed", ie.char_signed);
  ie.ptr_size = j.value("ptr_size", ie.ptr_size);
  ie.void_size = j.value("void_size", ie.void_size);
  if (j.contains("rank_sizes")) {
    auto rs = j.at("rank_sizes").get<std::vector<std::size_t>>();
    if (rs.size() != 5)
      throw error("impl: rank_sizes needs 5 entries");
    std::copy(rs.begin(), rs.end(), ie.rank_sizes);
  }
  std::string en = j.value("endian", std::string("little"));
  if (en != "little" && en != "big")
    throw error("impl: endian must be little or big");
  ie.endian = en == "big" ? endianness::big : endianness::little;
  if (ie.char_bits == 0 || ie.ptr_size == 0)
    throw error("impl: sizes must be positive");
  for (std::size_t i = 0; i < 5; ++i)
    if (ie.rank_sizes[i] == 0 || (i > 0 && ie.rank_sizes[i] < ie.rank_sizes[i - 1]))
      throw error("impl: rank sizes must be positive and non-decreasing");
  return ie;
}

// An implementation name or the path of a JSON file.
inline impl_env load_impl(const std::string &cfg) {
  if (auto ie = impl_by_name(cfg))
    return *ie;
  std::ifstream in(cfg);
  if (!in)
    throw error("impl: no implementation or file named '" + cfg + "'");
  try {
    return impl_from_json(json::parse(in));
  } catch (const json::exception &ex) {
    throw error("impl: " + cfg + ": " + ex.what());
  }
}

// The outcome of one statement.
struct outcome {
  std::size_t line = 0;
  std::string text;
  bool ok = true;
  std::string detail;
};

struct run_report {
  std::vector<outcome> steps;
  std::string final_state;
  bool aborted = false;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto &s : steps)
      n += s.ok ? 0 : 1;
    return n;
  }
  bool ok() const { return failures() == 0 && !aborted; }

  std::string text() const {
    std::string out;
    for (const auto &s : steps) {
      out += (s.ok ? "ok   " : "FAIL ") + std::to_string(s.line) + ": " + s.text;
      if (!s.detail.empty())
        out += " -> " + s.detail;
      out += "\n";
    }
    out += "final state: " + final_state + "\n";
    if (aborted)
      out += "script aborted\n";
    else if (ok())
      out += "script passed\n";
    else
      out += "script failed: " + std::to_string(failures()) + " of " +
             std::to_string(steps.size()) + " statements\n";
    return out;
  }
};

namespace detail {

// The result of an access: undefined with a reason, or the next memory and
// possibly a value read.
struct access_result {
  std::optional<ub_reason> ub;
  mem next;
  std::optional<val> value;
};

class runner {
public:
  explicit runner(const impl_env &ie) { e_.set_impl(ie); }

  run_report run(const script &s) {
    run_report rep;
    for (const auto &st : s.statements) {
      outcome o{st.line, st.text, true, {}};
      try {
        exec(st, o);
      } catch (const error &ex) {
        o.ok = false;
        o.detail = std::string("error: ") + ex.what();
        rep.steps.push_back(std::move(o));
        rep.aborted = true;
        break;
      }
      rep.steps.push_back(std::move(o));
    }
    rep.final_state = dump_state(m_);
    return rep;
  }

  const mem &memory() const { return m_; }

private:
  env e_;
  mem m_;
  bool allocated_ = false;
  std::map<std::string, object_id> vars_;
  std::map<std::string, mem> checkpoints_;
  std::map<std::string, std::vector<std::string>> names_;

  void exec(const statement &st, outcome &o) {
    switch (st.k) {
    case statement::kind::declare:
      e_.declare(st.tag, st.fields);
      names_[st.tag] = st.names;
      if (!env_valid(e_.types))
        throw error("declaration of '" + st.tag + "' contains itself");
      return;
    case statement::kind::function:
      e_.declare_function(st.tag, st.fields, st.ret);
      return;
    case statement::kind::impl: {
      if (allocated_)
        throw error("impl must precede all allocations");
      auto ie = impl_by_name(st.tag);
      if (!ie)
        throw error("unknown implementation '" + st.tag + "'");
      e_.set_impl(*ie);
      return;
    }
    case statement::kind::let:
      return let(st);
    case statement::kind::checkpoint:
      checkpoints_[st.tag] = m_;
      return;
    case statement::kind::assert_memory: {
      auto it = checkpoints_.find(st.tag);
      if (it == checkpoints_.end())
        throw error("unknown checkpoint '" + st.tag + "'");
      if (!(it->second == m_)) {
        o.ok = false;
        o.detail = "memory differs from checkpoint " + st.tag;
      }
      return;
    }
    case statement::kind::dump:
      o.detail = dump_state(m_);
      return;
    case statement::kind::expect: {
      access_result r = access(*st.inner);
      if (st.expect_defined) {
        if (r.ub) {
          o.ok = false;
          o.detail = std::string("expected defined, got undefined(") + to_string(*r.ub) + ")";
          return;
        }
        finish(*st.inner, r, o);
        return;
      }
      std::string want = st.reason ? std::string("undefined(") + to_string(*st.reason) + ")"
                                   : std::string("undefined");
      if (!r.ub) {
        o.ok = false;
        o.detail = "expected " + want + ", got defined";
      } else if (st.reason && *st.reason != *r.ub) {
        o.ok = false;
        o.detail = "expected " + want + ", got undefined(" + to_string(*r.ub) + ")";
      } else {
        o.detail = std::string("undefined(") + to_string(*r.ub) + ")";
      }
      return;
    }
    default: {
      access_result r = access(st);
      if (r.ub) {
        o.ok = false;
        o.detail = std::string("undefined(") + to_string(*r.ub) + ")";
        return;
      }
      finish(st, r, o);
      return;
    }
    }
  }

  // Commits a defined access and checks an expected value.
  void finish(const statement &st, const access_result &r, outcome &o) {
    m_ = r.next;
    if (!r.value)
      return;
    o.detail = to_string(*r.value);
    if (st.v) {
      val want = freeze(value(*st.v, type_of(*r.value), m_));
      if (!(want == *r.value)) {
        o.ok = false;
        o.detail = "read " + to_string(*r.value) + ", expected " + to_string(want);
      }
    }
  }

  void let(const statement &st) {
    if (!type_valid(e_.types, st.ret))
      throw error("type " + to_string(st.ret) + " is not valid");
    val v = st.v ? value(*st.v, st.ret, m_) : val_new(e_, st.ret);
    object_id o = fresh_index(m_);
    if (st.konst) {
      std::vector<perm> gs(bit_size_of(e_, st.ret), perm_const(1));
      m_.cells[o] = live_object{of_val(e_, gs, v), st.malloced};
    } else {
      m_ = mem_alloc(e_, o, v, st.malloced, m_);
    }
    vars_[st.tag] = o;
    allocated_ = true;
  }

  // Reads a stored pointer, as an rvalue conversion does: the access forces
  // the variants on its way and fails like any other read.
  access_result read(const addr &a, const mem &m) {
    if (auto why = read_failure(e_, a, m))
      return {why, m, std::nullopt};
    auto forced = mem_force(e_, a, m);
    if (!forced)
      throw error("force failed at " + to_string(a));
    auto v = mem_lookup(e_, a, *forced);
    if (!v)
      throw error("lookup failed at " + to_string(a));
    return {std::nullopt, *forced, v};
  }

  // Elaborates a path to an address. Dereferences read the stored pointer in
  // m, so evaluation may itself be undefined.
  std::optional<addr> eval(const path &p, mem &m, std::optional<ub_reason> &ub) {
    addr a;
    if (p.deref) {
      auto q = eval(*p.deref, m, ub);
      if (!q)
        return std::nullopt;
      access_result r = read(*q, m);
      if (r.ub) {
        ub = r.ub;
        return std::nullopt;
      }
      m = r.next;
      const val &v = *r.value;
      if (v.k != val::kind::base || v.b.k != base_val::kind::pointer)
        throw error("dereference of a non-pointer value " + to_string(v));
      if (v.b.p.k != ptr::kind::address)
        throw error("dereference of " + to_string(v.b.p));
      a = v.b.p.a;
    } else {
      object_id o = vars_.at(p.var);
      auto it = m.cells.find(o);
      type t = std::holds_alternative<type>(it->second)
                   ? std::get<type>(it->second)
                   : type_of(std::get<live_object>(it->second).tree);
      a = {o, t, {}, 0, t, ptr_to(t)};
    }
    for (const auto &s : p.steps) {
      if (s.k == path_step::kind::byte) {
        a.byte += s.i;
        a.cast = ptr_to(uchar_t());
        continue;
      }
      if (addr_is_byte(a) || a.byte % size_of(e_, a.sub) != 0)
        throw error("path steps from a misaligned address " + to_string(a));
      ref r = addr_ref(e_, a);
      type next;
      switch (s.k) {
      case path_step::kind::field:
      case path_step::kind::variant:
        next = fields_of(e_, a.sub)[s.i];
        r.push_back(a.sub.is_union() ? seg_union(s.i, a.sub.tag, false)
                                     : seg_struct(s.i, a.sub.tag));
        a.byte = 0;
        break;
      case path_step::kind::index:
        next = a.sub.element();
        r.push_back(seg_array(0, next, a.sub.n));
        a.byte = s.i * size_of(e_, next);
        break;
      case path_step::kind::byte:
        break;
      }
      a.r = std::move(r);
      a.sub = next;
      a.cast = ptr_to(next);
    }
    return a;
  }

  // The type a value stored at a must have.
  static type stored_type(const addr &a) {
    return a.cast.k == ptr_type::kind::to ? *a.cast.target : a.sub;
  }

  access_result access(const statement &st) {
    mem m = m_;
    if (st.k == statement::kind::unlock && !st.p)
      return {std::nullopt, mem_unlock(mem_locks(m), m), std::nullopt};
    std::optional<ub_reason> ub;
    auto a = eval(*st.p, m, ub);
    if (!a)
      return {ub, m_, std::nullopt};
    switch (st.k) {
    case statement::kind::read: {
      auto r = read(*a, m);
      if (r.ub)
        r.next = m_;
      return r;
    }
    case statement::kind::peek: {
      if (auto why = read_failure(e_, *a, m))
        return {why, m_, std::nullopt};
      return {std::nullopt, m, mem_lookup(e_, *a, m)};
    }
    case statement::kind::force:
    case statement::kind::lock: {
      std::optional<ub_reason> why;
      if (!cmap_lookup(e_, *a, m, &why))
        return {why, m_, std::nullopt};
      auto m2 = st.k == statement::kind::force ? mem_force(e_, *a, m) : mem_lock(e_, *a, m);
      if (!m2)
        throw error("access failed at " + to_string(*a));
      return {std::nullopt, *m2, std::nullopt};
    }
    case statement::kind::write:
    case statement::kind::store: {
      type t = stored_type(*a);
      val v = value(*st.v, t, m);
      if (auto why = write_failure(e_, *a, m))
        return {why, m_, std::nullopt};
      auto m2 = mem_insert(e_, *a, v, m);
      if (m2 && st.k == statement::kind::write)
        m2 = mem_lock(e_, *a, *m2);
      if (!m2)
        throw error("store failed at " + to_string(*a));
      return {std::nullopt, *m2, std::nullopt};
    }
    case statement::kind::unlock:
      return {std::nullopt, mem_unlock(lock_singleton(e_, *a), m), std::nullopt};
    case statement::kind::free: {
      if (!m.live(a->index))
        return {ub_reason::dead_object, m_, std::nullopt};
      addr f = *a;
      if (f.sub.is_array() && !addr_is_byte(f)) {
        f.r = addr_ref(e_, f);
        f.r.push_back(seg_array(0, f.sub.element(), f.sub.n));
        f.byte = 0;
        f.sub = f.sub.element();
        f.cast = ptr_to(f.sub);
      }
      if (!mem_freeable(e_, f, m))
        return {ub_reason::not_freeable, m_, std::nullopt};
      return {std::nullopt, mem_free(f.index, m), std::nullopt};
    }
    default:
      throw error("not an access statement");
    }
  }

  // Builds a value of type t. Address values are computed in m without
  // accessing the designated object.
  val value(const value_expr &x, const type &t, mem &m) {
    auto mismatch = [&](const std::string &what) {
      return error(what + " is not a value of type " + to_string(t));
    };
    switch (x.k) {
    case value_expr::kind::number:
      if (!t.is_base() || t.base.k != base_type::kind::integer)
        throw mismatch(x.x.str());
      if (!int_typed(e_.impl, x.x, t.base.it))
        throw error(x.x.str() + " is out of range for " + to_string(t));
      return v_int(t.base.it, x.x);
    case value_expr::kind::indet:
      if (t.is_base())
        return v_base(bv_indet(t.base));
      return val_new(e_, t);
    case value_expr::kind::null:
      if (!t.is_base() || t.base.k != base_type::kind::pointer)
        throw mismatch("null");
      return v_base(bv_ptr(null_ptr(*t.base.ptr)));
    case value_expr::kind::function: {
      const auto &sig = e_.types.functions.at(x.name);
      ptr p = fun_ptr(x.name, sig.first, sig.second);
      if (!t.is_base() || t.base.k != base_type::kind::pointer || !(type_of(p) == *t.base.ptr))
        throw mismatch("&" + x.name);
      return v_base(bv_ptr(p));
    }
    case value_expr::kind::addr_of: {
      if (!t.is_base() || t.base.k != base_type::kind::pointer)
        throw mismatch("an address");
      std::optional<ub_reason> ub;
      auto a = eval(*x.p, m, ub);
      if (!a)
        throw error(std::string("address computation is undefined(") + to_string(*ub) + ")");
      const ptr_type &pt = *t.base.ptr;
      if (pt.k == ptr_type::kind::to && *pt.target == uchar_t())
        a->cast = pt;
      else if (pt.k == ptr_type::kind::any)
        a->cast = pt;
      else if (!(a->cast == pt))
        throw mismatch("address of " + to_string(a->sub));
      return v_base(bv_ptr(addr_ptr(*a)));
    }
    case value_expr::kind::list: {
      std::vector<val> vs;
      if (t.is_array()) {
        if (x.items.size() != t.n)
          throw error("expected " + std::to_string(t.n) + " elements for " + to_string(t));
        for (const auto &i : x.items)
          vs.push_back(value(i, t.element(), m));
        return v_array(t.element(), std::move(vs));
      }
      if (t.is_struct()) {
        const auto &fs = fields_of(e_, t);
        if (x.items.size() != fs.size())
          throw error("expected " + std::to_string(fs.size()) + " fields for " + to_string(t));
        for (std::size_t i = 0; i < fs.size(); ++i)
          vs.push_back(value(x.items[i], fs[i], m));
        return v_struct(t.tag, std::move(vs));
      }
      if (t.is_union()) {
        if (x.items.size() != 1)
          throw error("a union initializer has one element");
        return v_union(t.tag, 0, value(x.items[0], fields_of(e_, t)[0], m));
      }
      throw mismatch("a braced list");
    }
    case value_expr::kind::designated: {
      if (!t.is_struct() && !t.is_union())
        throw mismatch("a designated initializer");
      const auto &names = field_names(t.tag);
      const auto &fs = fields_of(e_, t);
      auto index = [&](const std::string &n) {
        for (std::size_t i = 0; i < names.size(); ++i)
          if (names[i] == n)
            return i;
        throw error("no field '" + n + "' in " + to_string(t));
      };
      if (t.is_union()) {
        if (x.items.size() != 1)
          throw error("a union initializer designates one variant");
        std::size_t i = index(x.names[0]);
        return v_union(t.tag, i, value(x.items[0], fs[i], m));
      }
      std::vector<val> vs;
      for (const auto &f : fs)
        vs.push_back(val_new(e_, f));
      for (std::size_t k = 0; k < x.items.size(); ++k) {
        std::size_t i = index(x.names[k]);
        vs[i] = value(x.items[k], fs[i], m);
      }
      return v_struct(t.tag, std::move(vs));
    }
    }
    throw error("bad value");
  }

  const std::vector<std::string> &field_names(const std::string &tag) const {
    return names_.at(tag);
  }
};

} // namespace detail

inline run_report run_script(const script &s, const impl_env &ie = {}, mem *final_memory = nullptr) {
  detail::runner r(ie);
  run_report rep = r.run(s);
  if (final_memory)
    *final_memory = r.memory();
  return rep;
}

} // namespace ch2o::script
