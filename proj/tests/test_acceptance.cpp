#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "qtlab/acceptance.hpp"

using namespace qtlab;

TEST_CASE("full acceptance battery passes", "[acceptance]") {
  std::ostringstream progress;
  const AcceptanceReport rep = run_acceptance(&progress);

  REQUIRE(rep.criteria.size() == 9);
  for (const auto& cr : rep.criteria) {
    REQUIRE_FALSE(cr.checks.empty());
    for (const auto& chk : cr.checks) {
      INFO("criterion " << cr.id << " (" << cr.name << "), " << chk.label << ": value "
                        << chk.value << (chk.leq ? " <= " : " >= ") << chk.threshold);
      CHECK(chk.pass());
    }
  }
  REQUIRE(rep.all_pass);

  for (int id = 1; id <= 9; ++id) {
    const std::string line = "criterion " + std::to_string(id) + ":";
    INFO("progress line for " << line);
    CHECK(progress.str().find("[PASS] " + line) != std::string::npos);
  }

  CHECK(rep.csv_text.rfind("# qtlab", 0) == 0);
  CHECK(rep.csv_text.find("criterion,name,check,value,threshold,comparison,status\n") !=
        std::string::npos);
  CHECK(rep.csv_text.find(",fail\n") == std::string::npos);

  std::size_t data_lines = 0;
  std::istringstream lines(rep.csv_text);
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("criterion,", 0) != 0) ++data_lines;
  std::size_t total_checks = 0;
  for (const auto& cr : rep.criteria) total_checks += cr.checks.size();
  CHECK(data_lines == total_checks);
}
