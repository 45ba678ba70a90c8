// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

// Acceptance checks: one PASS or FAIL line per criterion. Exits nonzero when
// any criterion fails.

#include "ch2o/ch2o.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef CH2O_SCENARIO_DIR
#error "CH2O_SCENARIO_DIR must name the scenario directory"
#endif
#ifndef CH2O_MEMCTL
#error "CH2O_MEMCTL must name the memctl executable"
#endif

using namespace ch2o;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int failed = 0;

void verdict(int n, bool ok, const std::string &detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << detail << "\n";
  if (!ok)
    ++failed;
}

// Every check in the report holds, and each named check ran on at least
// `min_cases` cases. Missing checks count as failures.
bool checks_hold(const report &rep, const std::vector<std::string> &names,
                 std::size_t min_cases, std::string &detail) {
  std::ostringstream out;
  bool ok = rep.ok();
  for (const auto &n : names) {
    const check_result *c = rep.find(n);
    if (!c) {
      out << "[missing " << n << "] ";
      ok = false;
      continue;
    }
    out << "[" << n << ": " << c->cases << " cases, " << c->failures << " failures] ";
    ok = ok && c->ok() && c->cases >= min_cases;
  }
  if (!rep.ok())
    out << "other failures: " << rep.failures();
  detail = out.str();
  return ok;
}

std::string bits_text(const std::vector<bool> &bs) {
  std::string s;
  for (bool b : bs)
    s += b ? '1' : '0';
  return s;
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_laws() {
  auto t0 = clock_type::now();
  std::size_t checks = 0, cases = 0, bad = 0;
  for (const char *inst : {"bool", "frac", "counting", "lockable", "tagged", "perm"}) {
    report rep = run_laws(inst);
    for (const auto &c : rep.checks) {
      ++checks;
      cases += c.cases;
      bad += c.failures;
      if (c.cases == 0)
        ++bad;
    }
  }
  double t = seconds_since(t0);
  std::ostringstream d;
  d << "separation algebra laws on bool, frac, counting, lockable, tagged, perm: " << checks
    << " law checks, " << cases << " cases, " << bad << " failures, " << t << " s";
  verdict(1, bad == 0 && t < 60.0, d.str());
}

void criterion_perm() {
  auto rs = check_perm_lemma(perm_carrier());
  std::size_t cases = 0, bad = 0;
  for (const auto &r : rs) {
    cases += r.checked;
    bad += r.failures + (r.checked == 0 ? 1 : 0);
  }
  std::ostringstream d;
  d << "permission lemma: " << rs.size() << " clauses over " << perm_carrier().size()
    << " permissions, " << cases << " cases, " << bad << " failures";
  verdict(2, rs.size() == 6 && bad == 0, d.str());
}

void criterion_coding() {
  impl_env ie;
  std::size_t cases = 0, bad = 0;
  for (int_rank rk : {int_rank::char_rank, int_rank::short_rank})
    for (signedness sg : {signedness::is_signed, signedness::is_unsigned}) {
      int_type it{sg, rk};
      std::size_t b = int_bits(ie, it);
      for (integer x = int_min(ie, it); x < int_upper(ie, it); ++x, ++cases)
        bad += int_of_bits(ie, it, int_to_bits(ie, it, x)) == x ? 0 : 1;
      for (std::uint64_t k = 0; k < (std::uint64_t(1) << b); ++k, ++cases) {
        std::vector<bool> bs(b);
        for (std::size_t i = 0; i < b; ++i)
          bs[i] = (k >> i) & 1;
        bad += int_to_bits(ie, it, int_of_bits(ie, it, bs)) == bs ? 0 : 1;
      }
    }
  std::string s33 = bits_text(int_to_bits(ie, {signedness::is_signed, int_rank::short_rank}, 33));
  std::ostringstream d;
  d << "integer coding roundtrip on all 1 and 2 byte types: " << cases << " cases, " << bad
    << " failures; 33 at signed short is " << s33;
  verdict(3, bad == 0 && s33 == "1000010000000000", d.str());
}

void criterion_tree() {
  report rep = suite_tree({1, 1000});
  std::string d;
  bool ok = checks_hold(rep,
                        {"to_val (of_val v) = freeze v", "to_val (tree_new t) = val_new t",
                         "of_val (val_new t) = tree_new t"},
                        1000, d);
  verdict(4, ok, "value and tree conversions: " + d);
}

void criterion_mem(const report &rep) {
  std::string d;
  bool ok = checks_hold(rep,
                        {"stores commute", "lookup after store yields the frozen value",
                         "stores and lookups commute", "alter commutes"},
                        500, d);
  verdict(5, ok, "memory operation laws: " + d);
}

void criterion_aliasing() {
  report rep = suite_aliasing({1, 1000});
  std::string d;
  bool ok = checks_hold(
      rep, {"every pair is related by type, disjoint, or mutually inaccessible"}, 200, d);
  verdict(6, ok, "strict aliasing trichotomy: " + d);
}

void criterion_refine() {
  report rep = suite_refine({1, 1000});
  std::string d;
  bool ok = checks_hold(rep,
                        {"valid memories refine to themselves under the identity",
                         "refinements compose",
                         "a union in known variant refines to unknown variant",
                         "constant propagation", "memcpy: copy by value refines the object",
                         "memcpy: an object with unshared unions refines its byte copy",
                         "force can be erased for frozen addresses"},
                        500, d);
  verdict(7, ok, "refinement theorems: " + d);
}

void criterion_oracle(const report &rep) {
  std::string d;
  bool ok = checks_hold(rep, {"flat oracle agrees with lookup"}, 1000, d);
  verdict(8, ok, "flat oracle: " + d);
}

void criterion_scenarios() {
  auto t0 = clock_type::now();
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(CH2O_SCENARIO_DIR))
    if (entry.path().extension() == ".mc")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  const std::vector<std::string> required = {
      "punning_stored_pointer.mc", "punning_direct.mc", "double_store.mc", "padding.mc",
      "end_of_array.mc"};
  std::ostringstream d;
  bool ok = true;
  for (const auto &r : required)
    if (std::find(files.begin(), files.end(), fs::path(CH2O_SCENARIO_DIR) / r) == files.end()) {
      d << "[missing " << r << "] ";
      ok = false;
    }
  for (const auto &f : files) {
    bool pass = false;
    try {
      auto rep = script::run_script(script::parse_script(read_file(f)));
      pass = rep.ok();
      if (!pass)
        std::cout << rep.text();
    } catch (const error &ex) {
      std::cout << f.filename().string() << ": " << ex.what() << "\n";
    }
    d << "[" << f.filename().string() << (pass ? " passed" : " FAILED") << "] ";
    ok = ok && pass;
  }
  double t = seconds_since(t0);
  d << t << " s";
  verdict(9, ok && !files.empty() && t < 5.0, "scenario corpus: " + d.str());
}

void criterion_determinism() {
  fs::path dir = fs::temp_directory_path() / "ch2o-acceptance";
  fs::create_directories(dir);
  std::string memctl = CH2O_MEMCTL;
  auto run = [&](const std::string &args, const fs::path &out) {
    std::string cmd = "\"" + memctl + "\" " + args + " > \"" + out.string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  std::ostringstream d;
  bool ok = true;
  for (const char *s : {"sepalg", "tree", "mem", "refine", "aliasing"}) {
    std::string args = std::string("suite ") + s + " --seed 42 --cases 200";
    fs::path a = dir / (std::string(s) + "-1.txt"), b = dir / (std::string(s) + "-2.txt");
    int ra = run(args, a), rb = run(args, b);
    bool same = ra == 0 && rb == 0 && read_file(a) == read_file(b) && !read_file(a).empty();
    d << "[suite " << s << (same ? " identical" : " DIFFERS") << "] ";
    ok = ok && same;
  }
  fs::path script_path = fs::path(CH2O_SCENARIO_DIR) / "punning_stored_pointer.mc";
  fs::path j1 = dir / "dump-1.json", j2 = dir / "dump-2.json";
  int r1 = run("run \"" + script_path.string() + "\" --dump-json \"" + j1.string() + "\"",
               dir / "run-1.txt");
  int r2 = run("run \"" + script_path.string() + "\" --dump-json \"" + j2.string() + "\"",
               dir / "run-2.txt");
  bool dumps = r1 == 0 && r2 == 0 && !read_file(j1).empty() && read_file(j1) == read_file(j2);
  d << "[dumps" << (dumps ? " identical" : " DIFFER") << "]";
  ok = ok && dumps;
  verdict(10, ok, "determinism: " + d.str());
}

} // namespace

int main() {
  try {
    criterion_laws();
    criterion_perm();
    criterion_coding();
    criterion_tree();
    report mem_rep = suite_mem({1, 1000});
    criterion_mem(mem_rep);
    criterion_aliasing();
    criterion_refine();
    criterion_oracle(mem_rep);
    criterion_scenarios();
    criterion_determinism();
  } catch (const std::exception &ex) {
    std::cout << "FAIL acceptance aborted: " << ex.what() << "\n";
    return 1;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
