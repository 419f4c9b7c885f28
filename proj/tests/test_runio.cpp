#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mcflow/csvio.hpp"
#include "mcflow/runconfig.hpp"
#include "mcflow/selfcheck.hpp"

using namespace mcflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / "mcflow_runio";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

long line_count(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(MCFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("key value files parse with comments, overrides, and typed getters") {
  auto cfg = KeyValueConfig::from_text(
      "# run setup\n"
      "ambient = flat\n"
      "flow.dt = 2.5e-3   # small\n"
      "flow.max_steps = 40\n"
      "flow.residual_monitors = off\n"
      "init.tilt = 0.6, 0.0\n"
      "flow.dt = 1e-3\n");
  CHECK(cfg.get_str("ambient", "") == "flat");
  CHECK(cfg.get_num("flow.dt", 0) == 1e-3);  // later assignment wins
  CHECK(cfg.get_int("flow.max_steps", 0) == 40);
  CHECK(cfg.get_bool("flow.residual_monitors", true) == false);
  auto tilt = cfg.get_list("init.tilt", Eigen::VectorXd());
  REQUIRE(tilt.size() == 2);
  CHECK(tilt(0) == 0.6);
  CHECK(cfg.get_num("missing", 7.5) == 7.5);
  CHECK_FALSE(cfg.has("missing2"));
  CHECK_NOTHROW(cfg.reject_unread());

  cfg.set_pair("flow.dt = 5e-4");
  CHECK(cfg.get_num("flow.dt", 0) == 5e-4);

  auto items = cfg.items();
  bool found = false;
  for (const auto& [k, v] : items)
    if (k == "flow.dt") {
      CHECK(v == "5e-4");  // echo shows the winning value once
      found = true;
    }
  CHECK(found);

  SUBCASE("malformed input carries the origin and line") {
    try {
      KeyValueConfig::from_text("a = 1\nbroken line\n", "file.cfg");
      FAIL("no error raised");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("file.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(KeyValueConfig::from_text("a =\n"), ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::from_text("bad key! = 1\n"), ConfigError);
  }

  SUBCASE("typed getters reject mistyped values") {
    auto c = KeyValueConfig::from_text("a = notanumber\nb = 1.5\nc = maybe\n");
    CHECK_THROWS_AS(c.get_num("a", 0), ConfigError);
    CHECK_THROWS_AS(c.get_int("b", 0), ConfigError);
    CHECK_THROWS_AS(c.get_bool("c", false), ConfigError);
    CHECK_THROWS_AS(c.get_list("a", Eigen::VectorXd()), ConfigError);
  }

  SUBCASE("unknown keys are rejected wholesale") {
    auto c = KeyValueConfig::from_text("good = 1\ntypo.keey = 2\n");
    c.get_int("good", 0);
    try {
      c.reject_unread();
      FAIL("no error raised");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("typo.keey") != std::string::npos);
    }
  }
}

TEST_CASE("seventeen digit formatting round-trips doubles exactly") {
  for (double x : {1.0 / 3.0, 2.718281828459045, 1e-300, 6.626e34, 0.0, -1.25,
                   0.1 + 0.2}) {
    std::string s = fmt17(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("monitor series files have the fixed schema") {
  auto dir = scratch_dir();
  std::vector<MonitorRow> rows;
  MonitorRow r;
  r.step = 1;
  r.s = 0.1;
  r.dt = 0.1;
  r.sup_v = 1.25;
  r.area = 4.0;
  r.res_H2 = std::numeric_limits<double>::quiet_NaN();
  rows.push_back(r);

  auto path = dir / "monitor.csv";
  write_monitor_csv(path.string(), rows);
  std::string text = slurp(path);
  CHECK(text.rfind("step,s,dt,sup_v,min_g_eig,sup_H2,sup_A2,area,K_min,"
                   "res_uflow,res_H2,res_area\n", 0) == 0);
  CHECK(line_count(text) == 2);
  CHECK(text.find("nan") != std::string::npos);  // curved-ambient column

  write_monitor_csv(path.string(), {});
  CHECK(line_count(slurp(path)) == 1);  // header only

  SUBCASE("radial monitor files mirror the run rows") {
    std::vector<RadialRow> rr(3);
    rr[1].step = 2;
    rr[1].sup_dev = 0.25;
    auto rp = dir / "radial_monitor.csv";
    write_radial_monitor_csv(rp.string(), rr);
    std::string rtext = slurp(rp);
    CHECK(rtext.rfind("step,t,dt,sup_dev,min_H,min_Hprime\n", 0) == 0);
    CHECK(line_count(rtext) == 4);
  }
}

TEST_CASE("radial profiles round-trip through two-column files") {
  auto dir = scratch_dir();
  auto prof = make_radial_profile(0.5, 2.0, 25,
                                  [](double R) { return R + R * R * R; });
  auto path = dir / "profile.csv";
  write_radial_profile_csv(path.string(), prof);
  auto back = read_radial_profile_csv(path.string());
  CHECK((back.R - prof.R).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.H - prof.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.h == doctest::Approx(prof.h).epsilon(1e-15));
  CHECK(back.bc_lo == prof.H(0));
  CHECK(back.bc_hi == prof.H(prof.H.size() - 1));

  SUBCASE("comments and headers are skipped on read") {
    spit(dir / "hand.csv", "# hand written\nR,H\n1.0,2.0\n1.5,2.5\n2.0,3.0\n");
    auto p = read_radial_profile_csv((dir / "hand.csv").string());
    CHECK(p.R.size() == 3);
    CHECK(p.h == doctest::Approx(0.5));
  }

  SUBCASE("bad profile files are rejected") {
    spit(dir / "short.csv", "R,H\n1.0,2.0\n2.0,3.0\n");
    CHECK_THROWS_AS(read_radial_profile_csv((dir / "short.csv").string()), IoError);
    spit(dir / "nonuniform.csv", "R,H\n1.0,2.0\n1.5,2.5\n2.2,3.0\n");
    CHECK_THROWS_AS(read_radial_profile_csv((dir / "nonuniform.csv").string()),
                    IoError);
    spit(dir / "threecol.csv", "1.0,2.0,9\n1.5,2.5,9\n2.0,3.0,9\n");
    CHECK_THROWS_AS(read_radial_profile_csv((dir / "threecol.csv").string()),
                    IoError);
    CHECK_THROWS_AS(read_radial_profile_csv((dir / "missing.csv").string()),
                    IoError);
  }
}

TEST_CASE("matrices round-trip through CSV and reject ragged rows") {
  auto dir = scratch_dir();
  Eigen::MatrixXd M(2, 3);
  M << 1, 2, 1.0 / 3.0, -4, 5e-7, 6;
  auto path = dir / "M.csv";
  write_matrix_csv(path.string(), M);
  auto back = read_matrix_csv(path.string());
  CHECK((back - M).cwiseAbs().maxCoeff() == 0.0);

  spit(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(read_matrix_csv((dir / "ragged.csv").string()), IoError);
  spit(dir / "empty.csv", "# nothing\n");
  CHECK_THROWS_AS(read_matrix_csv((dir / "empty.csv").string()), IoError);
}

TEST_CASE("normal form serialization carries the block data") {
  Eigen::MatrixXd I3 = Eigen::MatrixXd::Identity(3, 3);
  auto P = PseudoOrthogonalMatrix::from_assembled(I3, {2, 1});
  auto nf = onm_normal_form(P);
  auto j = nlohmann::json::parse(normal_form_json(nf));
  CHECK(j["signature"]["n"] == 2);
  CHECK(j["signature"]["m"] == 1);
  CHECK(j["D1"].size() == 1);
  CHECK(j["D1"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["D2"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["canonical"].size() == 3);
}

TEST_CASE("command line runs produce the documented artifacts and exit codes") {
  auto dir = scratch_dir();
  auto out = [&](const char* name) { return (dir / name).string(); };

  SUBCASE("decompose writes the normal form") {
    spit(dir / "I.csv", "1,0,0\n0,1,0\n0,0,1\n");
    int code = run_cli("decompose --input " + out("I.csv") + " --out " + out("dec"));
    CHECK(code == 0);
    auto j = nlohmann::json::parse(slurp(dir / "dec" / "normal_form.json"));
    CHECK(j["D1"][0].get<double>() == doctest::Approx(1.0));
    CHECK(fs::exists(dir / "dec" / "run_manifest.json"));
  }

  SUBCASE("linear radial profiles give a stationary monitor series") {
    int code = run_cli("radial --profile linear --a 1.0 --steps 100 --out " +
                       out("rad"));
    CHECK(code == 0);
    std::string mon = slurp(dir / "rad" / "radial_monitor.csv");
    CHECK(line_count(mon) == 101);
    std::istringstream in(mon);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      auto c1 = line.find(',', line.find(',', line.find(',') + 1) + 1);
      CHECK(line.substr(c1 + 1, line.find(',', c1 + 1) - c1 - 1) == "0");
    }
    CHECK(slurp(dir / "rad" / "profile_final.csv") ==
          slurp(dir / "rad" / "profile_initial.csv"));
  }

  SUBCASE("flow emits one monitor row per step and snapshot files on cadence") {
    int code = run_cli(
        "flow --init sine --eps 1e-3 --N 12 --steps 20 --snapshot-every 10 "
        "--out " + out("flw"));
    CHECK(code == 0);
    CHECK(line_count(slurp(dir / "flw" / "monitor.csv")) == 21);
    CHECK(fs::exists(dir / "flw" / "snapshots" / "snap_000000.csv"));
    CHECK(fs::exists(dir / "flw" / "snapshots" / "snap_000010.csv"));
    CHECK(fs::exists(dir / "flw" / "snapshots" / "snap_000020.csv"));
    auto man = nlohmann::json::parse(slurp(dir / "flw" / "run_manifest.json"));
    CHECK(man["halt_code"] == 0);
    CHECK(man["config"]["init.eps"] == "1e-3");
    CHECK(man["outputs"].size() == 4);
  }

  SUBCASE("single-threaded reruns are byte-identical") {
    std::string args = "flow --init sine --eps 1e-2 --N 12 --steps 10 --out ";
    CHECK(run_cli(args + out("ra")) == 0);
    CHECK(run_cli(args + out("rb")) == 0);
    CHECK(slurp(dir / "ra" / "monitor.csv") == slurp(dir / "rb" / "monitor.csv"));
    CHECK(slurp(dir / "ra" / "snapshots" / "snap_000010.csv") ==
          slurp(dir / "rb" / "snapshots" / "snap_000010.csv"));
  }

  SUBCASE("the output root variable relocates the run directory") {
    std::string cmd = "MCFLOW_OUTPUT_ROOT=" + out("root") + " " MCFLOW_CLI_PATH
                      " radial --steps 2 --out sub >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "root" / "sub" / "radial_monitor.csv"));
  }

  SUBCASE("failure categories map to distinct exit codes") {
    spit(dir / "broken.cfg", "not a config\n");
    CHECK(run_cli("flow --config " + out("broken.cfg")) == 2);
    CHECK(run_cli("flow --set oops=1 --steps 1 --N 8 --out " + out("e2")) == 2);
    CHECK(run_cli("radial --dt 1.0 --steps 2 --out " + out("e3")) == 3);
    spit(dir / "bad.csv", "2,0,0\n0,1,0\n0,0,1\n");
    CHECK(run_cli("decompose --input " + out("bad.csv") + " --out " + out("e4")) == 4);
    CHECK(run_cli("flow --init sine --eps 3.0 --N 8 --steps 1 --out " + out("e5")) == 4);
  }
}

TEST_CASE("the built-in property suite stays green") {
  auto results = run_self_checks();
  CHECK(results.size() >= 15);
  std::set<std::string> names;
  for (const auto& r : results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
    names.insert(r.name);
  }
  CHECK(names.size() == results.size());
  CHECK(all_pass(results));
}
