#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include "evobranch/bench.hpp"
#include "evobranch/instances.hpp"
#include "evobranch/text.hpp"
#include "support/evolve_setup.hpp"

using namespace evobranch;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(EVOBRANCH_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("solve prints nodes and objective") {
  support::TempDir dir("cli_solve");
  const auto path = dir.path() / "tiny.mip";
  write_instance(path, comb_auction_from_bids(2, {Bid{{0}, 5.0}, Bid{{1}, 3.0}}));
  const Run r = cli("solve --instance " + path.string() + " --policy most_fractional");
  CHECK(r.code == 0);
  CHECK(r.out.find("nodes 0") != std::string::npos);
  CHECK(r.out.find("objective -8") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  const Run missing = cli("evolve --config /no/such/missing.toml");
  CHECK(missing.code == 1);
  CHECK(missing.out.find("missing.toml") != std::string::npos);
  CHECK(cli("solve --no-such-flag x").code == 1);
  CHECK(cli("").code == 1);
  CHECK(cli("bench --policy nope --instances " EVOBRANCH_FIXTURE_DIR "/evolve_three.txt").code == 1);
  CHECK(cli("--help").code == 0);
}

TEST_CASE("runtime failures exit 2") {
  support::TempDir dir("cli_bad");
  write_file_atomic(dir.path() / "bad.mip", "not an instance\n");
  CHECK(cli("solve --instance " + (dir.path() / "bad.mip").string()).code == 2);
}

TEST_CASE("generate then bench writes the fixed report format") {
  support::TempDir dir("cli_bench");
  const std::string out = (dir.path() / "inst").string();
  const Run gen = cli("generate --family setcover --size-a 40 --size-b 80 --density 0.1 --count 2 --seed 4 --out " + out);
  REQUIRE(gen.code == 0);
  const std::string files = out + "/set_cover_40x80_s4.mip " + out + "/set_cover_40x80_s5.mip";
  const std::string csv = (dir.path() / "r.csv").string();
  const Run bench = cli("bench --quiet --seed 1 --workers 2 --policy random --policy dsl:" EVOBRANCH_PROGRAM_DIR
                        "/setcover.spl --instances " + files + " --out " + csv);
  REQUIRE(bench.code == 0);
  const std::string text = read_file(csv);
  CHECK(text.rfind("policy,instance,status,nodes,time_s,gap\n", 0) == 0);
  CHECK(read_report_csv(text).cells.size() == 4);
  const Run rep = cli("report --bench " + csv);
  CHECK(rep.code == 0);
  CHECK(rep.out.find("random") != std::string::npos);
}

TEST_CASE("evolve runs from a config file") {
  support::TempDir dir("cli_evolve");
  std::filesystem::create_directories(dir.path() / "inst");
  const auto instances = support::evolve_instances();
  for (std::size_t k = 0; k < instances.size(); ++k) {
    write_instance(dir.path() / "inst" / ("i" + std::to_string(k) + ".mip"), instances[k]);
  }
  write_file_atomic(dir.path() / "run.toml",
                    "seed = 11\n"
                    "[evolve]\niterations = 3\noutput_dir = \"out\"\nbaseline = \"random\"\n"
                    "initial = \"" EVOBRANCH_PROGRAM_DIR "/constant.spl\"\n"
                    "[instances]\ndir = \"inst\"\nsubset = 2\n"
                    "[tuning]\nmax_iterations = 1\n"
                    "[llm]\nvariant = \"scripted\"\nfixture = \"" EVOBRANCH_FIXTURE_DIR "/evolve_three.txt\"\n");
  const Run r = cli("evolve --config " + (dir.path() / "run.toml").string());
  CHECK(r.code == 0);
  INFO(r.out);
  CHECK(r.out.find("generated 3") != std::string::npos);
  const auto at = r.out.find("evaluated ");
  REQUIRE(at != std::string::npos);
  const int evaluated = std::atoi(r.out.c_str() + at + 10);
  CHECK(std::filesystem::exists(dir.path() / "out" / "history.csv"));
  const Run rep = cli("report --database " + (dir.path() / "out" / "programs.jsonl").string());
  CHECK(rep.code == 0);
  CHECK(rep.out.find("programs " + std::to_string(1 + evaluated) + "\n") != std::string::npos);
  const Run feats = cli("report --features");
  CHECK(feats.out.find("90 | ") != std::string::npos);
}
