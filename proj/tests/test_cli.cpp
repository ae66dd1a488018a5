#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "crcal/data_model.hpp"
#include "crcal/report.hpp"
#include "doctest.h"

namespace fs = std::filesystem;
using crcal::Json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(CRCAL_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("crcal_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("simulate, fit, score, recalibrate, evaluate") {
  TempDir dir;
  REQUIRE(run("simulate --n 600 --seed 3 --grid-size 24 --out " + dir / "sim") == 0);
  for (const char* f : {"cohort.csv", "oracle_bundle.csv", "latents.csv"})
    CHECK(fs::exists(dir / (std::string("sim/") + f)));
  const auto cohort = crcal::parse_cohort(crcal::read_file(dir / "sim/cohort.csv"), 3);
  CHECK(cohort.size() == 600);
  CHECK(crcal::read_file(dir / "sim/latents.csv").rfind("id,l1,l2,l3,s1,s2,s3,tstar,dstar,ctime\n", 0) == 0);

  REQUIRE(run("aj --train " + dir / "sim/cohort.csv" + " --predict " + dir / "sim/cohort.csv" +
              " --grid-size 16 --out " + dir / "aj.csv --curves " + dir / "curves.csv") == 0);
  const auto aj = crcal::parse_bundle(crcal::read_file(dir / "aj.csv"), 3);
  CHECK(aj.size() == 600);

  REQUIRE(run("metrics --cohort " + dir / "sim/cohort.csv" + " --bundle " + dir / "aj.csv" +
              " --alpha inf --rho-steps 50 --seed 3 --out " + dir / "report.json") == 0);
  const auto report = Json::parse(crcal::read_file(dir / "report.json"));
  CHECK(report["params"]["alpha"] == "inf");
  CHECK(report["n"] == 600);
  CHECK(report["pi_cal"]["total"].get<double>() < 1e-12);

  for (const std::string method : {"aj", "ts"}) {
    const auto out = dir / ("recal_" + method);
    REQUIRE(run("recalibrate --method " + method + " --cal-cohort " + dir / "sim/cohort.csv" +
                " --cal-bundle " + dir / "sim/oracle_bundle.csv" + " --test-bundle " +
                dir / "sim/oracle_bundle.csv" + " --grid-size 16 --out " + out) == 0);
    const auto map = Json::parse(crcal::read_file(out + "/map.json"));
    CHECK(map["method"] == method);
    CHECK(map.contains("clip_events"));
    CHECK(crcal::parse_bundle(crcal::read_file(out + "/recalibrated_bundle.csv"), 3).size() == 600);
  }

  REQUIRE(run("evaluate --cohort " + dir / "sim/cohort.csv" + " --bundle " +
              dir / "sim/oracle_bundle.csv" + " --out " + dir / "eval.json --curves " +
              dir / "mean.csv") == 0);
  const auto eval = Json::parse(crcal::read_file(dir / "eval.json"));
  CHECK(eval["evaluation"]["c_index"].size() == 9);
  CHECK(crcal::read_file(dir / "mean.csv").rfind("event,time,mean_cif\n", 0) == 0);
}

TEST_CASE("bench writes per-seed reports and a summary") {
  TempDir dir;
  write(dir / "bench.json",
        R"({"data":{"source":"synthetic","n":500},"models":["aj","distorted_oracle"],"grid_size":12})");
  REQUIRE(run("bench --config " + dir / "bench.json" + " --seeds 2 --seed 4 --out " + dir / "out") == 0);
  for (const char* f : {"summary.json", "summary.csv", "seed_4/aj_base.json", "seed_5/aj_ts_map.json",
                        "seed_4/splits.json", "seed_4/train_ids.csv", "seed_4/cal_ids.csv",
                        "seed_4/test_ids.csv", "seed_5/distorted_oracle_aj.json"})
    CHECK_MESSAGE(fs::exists(dir / (std::string("out/") + f)), f);
  const auto audit = Json::parse(crcal::read_file(dir / "out/seed_4/splits.json"));
  CHECK(audit["disjoint"] == true);
  CHECK(audit["train"].get<int>() + audit["calibration"].get<int>() + audit["test"].get<int>() == 500);
}

TEST_CASE("external bundles join the benchmark") {
  TempDir dir;
  REQUIRE(run("simulate --n 400 --seed 1 --grid-size 16 --out " + dir / "sim") == 0);
  write(dir / "bench.json", R"({"data":{"source":"csv","path":")" + dir / "sim/cohort.csv" +
                                R"("},"models":["aj"],"external_models":[{"name":"ext","cal_bundle":")" +
                                dir / "sim/oracle_bundle.csv" + R"(","test_bundle":")" +
                                dir / "sim/oracle_bundle.csv" + R"("}],"grid_size":10})");
  REQUIRE(run("bench --config " + dir / "bench.json" + " --seeds 1 --seed 1 --out " + dir / "out") == 0);
  CHECK(fs::exists(dir / "out/seed_1/ext_ts.json"));
}

TEST_CASE("exit codes") {
  TempDir dir;
  CHECK(run("") == 2);
  CHECK(run("metrics --cohort nope.csv --bundle nope.csv --out x.json") == 2);
  CHECK(run("simulate --n 0 --out " + dir / "x") == 2);
  CHECK(run("--help") == 0);

  write(dir / "c.csv", "id,time,event\na,1,0\nb,1.5,1\n");
  write(dir / "b.csv",
        "sample_id,event,time,cif\n"
        "a,1,1,0.5\na,1,2,0.5000005\na,2,1,0.5\na,2,2,0.5\n"
        "b,1,1,0.2\nb,1,2,0.4\nb,2,1,0.2\nb,2,2,0.4\n");
  CHECK(run("metrics --k 2 --cohort " + dir / "c.csv" + " --bundle " + dir / "b.csv" + " --out " +
            dir / "r.json") == 3);
  CHECK(run("metrics --k 2 --alpha 0.5 --cohort " + dir / "c.csv" + " --bundle " + dir / "b.csv" +
            " --out " + dir / "r.json") == 2);
  CHECK(run("metrics --k 2 --alpha abc --cohort " + dir / "c.csv" + " --bundle " + dir / "b.csv" +
            " --out " + dir / "r.json") == 2);
  CHECK(run("recalibrate --method zz --cal-cohort " + dir / "c.csv" + " --cal-bundle " + dir / "b.csv" +
            " --test-bundle " + dir / "b.csv" + " --out " + dir / "o") == 2);
  write(dir / "bad.json", "{not json");
  CHECK(run("bench --config " + dir / "bad.json" + " --out " + dir / "o") == 2);
}
