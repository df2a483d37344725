#include <polyreg/config.hpp>
#include <polyreg/experiments.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace polyreg;
namespace fs = std::filesystem;

namespace {

const fs::path config_dir = fs::path(POLYREG_SOURCE_DIR) / "configs";

const char* minimal = R"(
[domain]
lo = 0 0
hi = 1 1
resolution = 3 3
)";

std::string parse_error(const std::string& text)
{
  try {
    parse_config(text, "t.ini");
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    return e.what();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return {};
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string(POLYREG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("polyreg_test_config_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST(Config, ShippedConfigsParseAndBuild)
{
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.path().extension() != ".ini") continue;
    ++count;
    SCOPED_TRACE(entry.path().string());
    const auto cfg = load_config(entry.path());
    const auto dom = build_domain(cfg);
    EXPECT_NO_THROW(build_regularizer(cfg, dom));
    EXPECT_NO_THROW(build_operator(cfg, dom));
    EXPECT_EQ(build_solution(cfg, dom).components(), cfg.space.components);
  }
  EXPECT_GE(count, 5u);
}

TEST(Config, SerializeRoundTrip)
{
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.path().extension() != ".ini") continue;
    SCOPED_TRACE(entry.path().string());
    const auto cfg = load_config(entry.path());
    const auto text = serialize_config(cfg);
    const auto again = parse_config(text, "round-trip");
    EXPECT_EQ(again, cfg);
    EXPECT_EQ(serialize_config(again), text);
  }
}

TEST(Config, DefaultsAndComments)
{
  const auto cfg = parse_config(std::string(minimal) + "[conditions]\nbeta2 = auto ; trailing\n# full line\n");
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_FALSE(cfg.conditions.beta2.has_value());
  EXPECT_FALSE(cfg.growth.configured);
  EXPECT_EQ(cfg.op.id, "identity");
  EXPECT_EQ(build_domain(cfg).node_count(), 16u); // resolution counts cells
}

TEST(Config, UnknownKeyNamesTheLine)
{
  const auto msg = parse_error(std::string(minimal) + "[solver]\nmax_iters = 10\nmaxiters = 5\n");
  EXPECT_NE(msg.find("t.ini:8:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("maxiters"), std::string::npos) << msg;
}

TEST(Config, UnknownSection)
{
  const auto msg = parse_error("[domian]\nlo = 0\n");
  EXPECT_NE(msg.find("t.ini:1:"), std::string::npos) << msg;
}

TEST(Config, DuplicateKey)
{
  const auto msg = parse_error(std::string(minimal) + "[run]\nseed = 3\nseed = 4\n");
  EXPECT_NE(msg.find("t.ini:8:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
}

TEST(Config, BadNumber)
{
  const auto msg = parse_error(std::string(minimal) + "[conditions]\nrho = 1e4x\n");
  EXPECT_NE(msg.find("t.ini:7:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("rho"), std::string::npos) << msg;
}

TEST(Config, KeyOutsideSection)
{
  const auto msg = parse_error("seed = 1\n");
  EXPECT_NE(msg.find("t.ini:1:"), std::string::npos) << msg;
}

TEST(Config, ListLengthReportedAtKey)
{
  const auto msg = parse_error(std::string(minimal) + "[space]\ncomponents = 2\n\n[solution]\nlinear = 1 2 3\n");
  EXPECT_NE(msg.find("t.ini:10:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("solution.linear"), std::string::npos) << msg;
}

TEST(Config, ElasticNeedsSquareMaps)
{
  const auto msg = parse_error(std::string(minimal) + "[integrand]\nid = elastic\n");
  EXPECT_NE(msg.find("t.ini:7:"), std::string::npos) << msg;
}

TEST(Config, MissingFile)
{
  try {
    load_config(config_dir / "does_not_exist.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Cli, ExitCodes)
{
  const auto out = scratch("exit");
  const auto cfg = [](const char* name) { return (config_dir / name).string(); };
  EXPECT_EQ(run_cli("check-conditions --config " + cfg("identity_convex.ini") + " --out " + out.string()), 0);
  EXPECT_EQ(run_cli("check-conditions --config " + cfg("zero_operator.ini") + " --out " + out.string()), 2);
  EXPECT_EQ(run_cli("check-conditions --config " + cfg("nope.ini") + " --out " + out.string()), 3);
  EXPECT_EQ(run_cli("no-such-command"), 3);

  const fs::path broken = out / "broken.ini";
  write_text_file(broken, "[domain]\nresolution = 1\n");
  EXPECT_EQ(run_cli("print-scenario --config " + broken.string() + " --out " + out.string()), 3);
}

TEST(Cli, OutputsAreByteIdentical)
{
  const auto a = scratch("a");
  const auto b = scratch("b");
  const auto cfg = (config_dir / "identity_convex.ini").string();
  for (const char* cmd : {"check-conditions", "verify-gradients"}) {
    SCOPED_TRACE(cmd);
    const int ea = run_cli(std::string(cmd) + " --config " + cfg + " --out " + a.string() + " --jobs 1");
    const int eb = run_cli(std::string(cmd) + " --config " + cfg + " --out " + b.string() + " --jobs 4");
    EXPECT_EQ(ea, eb);
    std::size_t csv = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++csv;
      EXPECT_EQ(read_text_file(entry.path()), read_text_file(b / entry.path().filename())) << entry.path();
    }
    EXPECT_GT(csv, 0u);
  }
}

TEST(Cli, SeedOverrideChangesSamples)
{
  const auto a = scratch("s1");
  const auto b = scratch("s2");
  const auto cfg = (config_dir / "identity_convex.ini").string();
  ASSERT_EQ(run_cli("check-conditions --config " + cfg + " --out " + a.string() + " --seed 1"), 0);
  ASSERT_EQ(run_cli("check-conditions --config " + cfg + " --out " + b.string() + " --seed 2"), 0);
  EXPECT_NE(read_text_file(a / "results.csv"), read_text_file(b / "results.csv"));
}
