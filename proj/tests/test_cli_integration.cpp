#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modham/cli_io.hpp"

using namespace modham;
namespace fs = std::filesystem;

namespace {

fs::path work() {
  static fs::path p = [] {
    fs::path d = fs::temp_directory_path() / "modham_cli_integration";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

int cli(const std::string& args) {
  std::string cmd = std::string("\"") + MODHAM_CLI_PATH + "\" " + args + " > \"" +
                    (work() / "last.log").string() + "\" 2>&1";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const std::string& name, const Json& j) {
  fs::path p = work() / (name + ".json");
  std::ofstream(p) << j.dump();
  return "\"" + p.string() + "\"";
}

std::string out_dir(const std::string& name) {
  return "--output-dir \"" + (work() / name).string() + "\"";
}

Json half_chain() {
  return {{"model", {{"n_sites", 8}, {"mass", 1.0}}},
          {"region", {{"half", Json::object()}}},
          {"tasks", {"kernels", "kms"}}};
}

}  // namespace

TEST(Cli, SuccessWritesBundle) {
  EXPECT_EQ(cli("run " + config("ok", half_chain()) + " " + out_dir("ok")), 0) << slurp(work() / "last.log");
  for (const char* f : {"kernels.json", "kms.json", "residuals.json", "metadata.json"})
    EXPECT_TRUE(fs::exists(work() / "ok" / f)) << f;
}

TEST(Cli, ToleranceFailureExitsTwo) {
  Json j = half_chain();
  j["model"]["mass"] = 0.1;
  j["region"] = {{"interval", {{"start", 3}, {"length", 2}}}};
  j["tasks"] = {"kms"};
  j["tolerances"] = {{"kms_tol", 1e-15}};
  j["precision"] = {{"mode", "double"}};
  EXPECT_EQ(cli("run " + config("tol", j) + " " + out_dir("tol")), 2) << slurp(work() / "last.log");
  Json res = Json::parse(slurp(work() / "tol" / "residuals.json"));
  EXPECT_FALSE(res["all_pass"].get<bool>());
}

TEST(Cli, NotStandardExitsThree) {
  Json j = half_chain();
  j["region"] = {{"sites", {0, 1, 2, 3, 4, 5, 6, 7}}};
  EXPECT_EQ(cli("run " + config("full", j) + " " + out_dir("full")), 3);
  Json e = Json::parse(slurp(work() / "full" / "error.json"));
  EXPECT_EQ(e["kind"], "NotStandard");
  EXPECT_EQ(cli("check " + config("full", j)), 3);
}

TEST(Cli, ByteIdenticalDataFiles) {
  std::string c = config("det", half_chain());
  ASSERT_EQ(cli("run " + c + " " + out_dir("det_a")), 0);
  ASSERT_EQ(cli("run " + c + " " + out_dir("det_b")), 0);
  for (const auto& e : fs::directory_iterator(work() / "det_a")) {
    std::string name = e.path().filename().string();
    if (name == "metadata.json") continue;
    EXPECT_EQ(slurp(e.path()), slurp(work() / "det_b" / name)) << name;
  }
}

TEST(Cli, CheckAndUsage) {
  EXPECT_EQ(cli("check " + config("chk", half_chain())), 0);
  Json normalized = Json::parse(slurp(work() / "last.log"));
  EXPECT_EQ(parse_config(normalized), parse_config(half_chain()));

  Json bad = half_chain();
  bad["region"] = {{"interval", {{"start", 6}, {"length", 4}}}};
  EXPECT_EQ(cli("check " + config("bad", bad) + " " + out_dir("bad")), 1);
  EXPECT_EQ(Json::parse(slurp(work() / "bad" / "error.json"))["kind"], "SchemaError");

  Json unknown = half_chain();
  unknown["colour"] = "red";
  EXPECT_EQ(cli("check " + config("unknown", unknown)), 1);
  EXPECT_EQ(cli("check --lenient " + config("unknown", unknown)), 0);

  EXPECT_EQ(cli("run \"" + (work() / "missing.json").string() + "\""), 4);
  EXPECT_EQ(cli(""), 1);
  EXPECT_EQ(cli("frobnicate"), 1);
  EXPECT_EQ(cli("run " + config("ok2", half_chain()) + " --format xml"), 1);
}

TEST(Cli, ScanSubcommandWithCsv) {
  Json j = {{"model", {{"n_sites", 64}, {"mass", 0.1}}},
            {"region", {{"half", Json::object()}}},
            {"tasks", {"kernels"}},
            {"scan", {{"lengths", {2, 4, 8}}}}};
  EXPECT_EQ(cli("scan " + config("scan", j) + " --format csv " + out_dir("scan")), 0);
  EXPECT_TRUE(fs::exists(work() / "scan" / "entropy_scan.csv"));
  EXPECT_FALSE(fs::exists(work() / "scan" / "entropy_scan.json"));
  EXPECT_FALSE(fs::exists(work() / "scan" / "kernels.json"));
}

TEST(Cli, StdinConfig) {
  std::string cfg = config("stdin", half_chain());
  EXPECT_EQ(cli("check - < " + cfg), 0);
}
