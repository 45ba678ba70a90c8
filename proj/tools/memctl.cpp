// Copyright (c) 2026 The ch2o-exec Authors.
// Distributed under the MIT license that can be found in the LICENSE file.

// memctl: runs memory scripts, law instances and property suites.

#include "ch2o/ch2o.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int run_command(const std::string &path, const std::string &impl, const std::string &dump_path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "memctl: cannot open " << path << "\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();
  ch2o::impl_env ie = ch2o::script::load_impl(impl);
  ch2o::script::script s;
  try {
    s = ch2o::script::parse_script(text.str());
  } catch (const ch2o::script::syntax_error &ex) {
    std::cerr << path << ": " << ex.what() << "\n";
    return 2;
  }
  ch2o::mem m;
  auto rep = ch2o::script::run_script(s, ie, &m);
  std::cout << rep.text();
  if (!dump_path.empty()) {
    std::ofstream out(dump_path, std::ios::binary);
    if (!out) {
      std::cerr << "memctl: cannot write " << dump_path << "\n";
      return 2;
    }
    out << ch2o::dump_state(m) << "\n";
  }
  return rep.ok() ? 0 : 1;
}

int report_command(const ch2o::report &rep) {
  std::cout << rep.text();
  return rep.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"memctl: executable CH2O memory model"};
  app.require_subcommand(1);

  std::string script_path, impl = "ilp32", dump_path;
  auto *run = app.add_subcommand("run", "Run a memory script");
  run->add_option("script", script_path, "Script file")->required();
  run->add_option("--impl", impl, "Implementation name (ilp32, ilp32-be, lp64, uchar) or JSON file");
  run->add_option("--dump-json", dump_path, "Write the final memory state as JSON");

  std::string instance;
  auto *laws = app.add_subcommand("laws", "Check the separation algebra laws");
  laws->add_option("--instance", instance, "Instance name")
      ->check(CLI::IsMember(ch2o::law_instances()));

  std::string suite;
  ch2o::suite_options opt;
  auto *suites = app.add_subcommand("suite", "Run a property suite");
  suites->add_option("name", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(ch2o::suite_names()));
  suites->add_option("--seed", opt.seed, "Random seed");
  suites->add_option("--cases", opt.cases, "Generated cases per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &ex) {
    return app.exit(ex) == 0 ? 0 : 2;
  }

  try {
    if (*run)
      return run_command(script_path, impl, dump_path);
    if (*laws)
      return report_command(ch2o::run_laws(instance, opt));
    return report_command(ch2o::run_suite(suite, opt));
  } catch (const ch2o::error &ex) {
    std::cerr << "memctl: " << ex.what() << "\n";
    return 2;
  }
}
