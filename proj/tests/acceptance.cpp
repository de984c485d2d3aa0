#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dpmpc/acceptance_config.hpp"
#include "dpmpc/reports.hpp"

// Prints one [PASS]/[FAIL] line per acceptance criterion. Exit status is 2 when
// a criterion fails, unless it is listed with --allow-fail (used by ctest for
// the criteria recorded as unattainable).
int main(int argc, char** argv) {
  CLI::App app{"dpmpc acceptance suite"};
  dpmpc::AcceptanceOptions opt;
  opt.seed = dpmpc::acceptance::kSeed;
  std::string allow;
  bool verbose = false;
  app.add_option("--seed", opt.seed, "base seed");
  app.add_flag("--quick", opt.quick, "reduced draw counts (smoke run)");
  app.add_option("--out", opt.out_dir, "directory for CSV and JSON artifacts");
  app.add_option("--allow-fail", allow, "comma-separated criteria whose failure does not affect the exit status");
  app.add_flag("-v,--verbose", verbose, "progress on stderr");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> allowed;
  std::stringstream ss(allow);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) allowed.insert(tok);
  if (verbose) opt.log = [](const std::string& s) { std::cerr << "... " << s << std::endl; };

  int failed = 0, tolerated = 0;
  for (const dpmpc::CriterionResult& r : dpmpc::run_acceptance(opt)) {
    std::cout << dpmpc::format_criterion(r) << std::endl;
    if (!r.pass) {
      if (allowed.count(r.name)) ++tolerated;
      else ++failed;
    }
  }
  std::cout << "summary: " << failed << " failing, " << tolerated << " failing but allowed" << std::endl;
  return failed ? 2 : 0;
}
