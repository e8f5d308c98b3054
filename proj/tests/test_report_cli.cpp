#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "bmf/backtester.hpp"
#include "bmf/report.hpp"
#include "bmf/timeseries.hpp"
#include "doctest.h"

using namespace bmf;
namespace fs = std::filesystem;

#ifndef BMF_CLI_PATH
#error "BMF_CLI_PATH must be defined by the build"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BMF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int ret = std::system(cmd.c_str());
  REQUIRE(ret != -1);
  return WIFEXITED(ret) ? WEXITSTATUS(ret) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bmf_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<ForecastRecord> sample_records() {
  std::vector<ForecastRecord> recs;
  for (int i = 0; i < 32; ++i) {
    for (const char* model : {"naive", "lear"}) {
      ForecastRecord r;
      r.origin_ts = Ts(i / 16) * 480;
      r.horizon = i % 16;
      r.target_ts = r.origin_ts + Ts(i % 16 + 2) * 30;
      r.y_true = 40.0 + i;
      r.y_pred = 40.0 + i + (model[0] == 'n' ? 2.0 : 1.0);
      r.model = model;
      r.training_window = 30;
      r.tuning_epoch = 0;
      recs.push_back(r);
    }
  }
  return recs;
}

}  // namespace

TEST_CASE("fnv1a known vectors") {
  CHECK(fnv1a(std::span<const char>{}) == 0xcbf29ce484222325ULL);
  const char a[] = {'a'};
  CHECK(fnv1a(std::span<const char>(a, 1)) == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_hex(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("csv emitters produce the expected shapes") {
  auto recs = sample_records();
  const std::string fc = forecasts_csv(recs);
  CHECK(std::count(fc.begin(), fc.end(), '\n') == 65);  // header + 64 rows

  const std::string mc = metrics_csv(recs);
  CHECK(std::count(mc.begin(), mc.end(), '\n') == 3);  // header + 2 model rows
  CHECK(mc.find("lear,30,1") != std::string::npos);
  CHECK(mc.find("naive,30,2") != std::string::npos);

  const std::string hc = hourly_csv(hourly_breakdown(recs));
  CHECK(std::count(hc.begin(), hc.end(), '\n') == 25);  // header + 24 hours
  CHECK(hc.rfind("hour,mean_price,sd_price,mae_lear,mae_naive", 0) == 0);
}

TEST_CASE("dm matrix csv encodes decisions and degeneracy") {
  DmMatrix m;
  m.models = {"a", "b"};
  m.cell.assign(2, std::vector<DmResult>(2));
  m.cell[0][1].reject = true;
  m.cell[1][0].degenerate = true;
  const std::string text = dm_matrix_csv(m);
  CHECK(text ==
        "model,a,b\n"
        "a,,1\n"
        "b,nd,\n");
}

TEST_CASE("manifest hash covers deterministic outputs only") {
  RunManifest m;
  m.config_text = "seed=1";
  m.dataset_hash = "abc";
  m.code_version = "x";
  m.seed = 1;
  m.outputs = {{"metrics.csv", "00ff"}};
  m.volatile_outputs = {"timing.csv"};
  m.stage_seconds["backtest"] = 1.5;
  RunManifest n = m;
  n.stage_seconds["backtest"] = 99.0;
  CHECK(m.manifest_hash() == n.manifest_hash());
  n.outputs[0].second = "00fe";
  CHECK(m.manifest_hash() != n.manifest_hash());
}

TEST_CASE("cli synth: size, determinism, invalid params") {
  const fs::path dir = fresh_dir("synth");
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  CHECK(run_cli("synth --days 2 --seed 7 --out " + a) == 0);
  CHECK(run_cli("synth --days 2 --seed 7 --out " + b) == 0);
  const std::string ta = slurp(a);
  CHECK(std::count(ta.begin(), ta.end(), '\n') == 97);  // header + 96 rows
  CHECK(ta == slurp(b));
  CHECK(run_cli("synth --days 1 --seed 7 --out " + a) == 2);
  CHECK(run_cli("synth --days 2 --seed 7 --spike-prob 1.5 --out " + a) == 2);
}

TEST_CASE("cli ingest: ok, missing column, oversized gap") {
  const fs::path dir = fresh_dir("ingest");
  const std::string good = (dir / "good.csv").string();
  CHECK(run_cli("synth --days 2 --seed 3 --out " + good) == 0);
  CHECK(run_cli("ingest --input " + good + " --fill reject --out " +
                (dir / "norm.csv").string()) == 0);
  CHECK(slurp(dir / "norm.csv") == slurp(good));

  {
    std::ofstream f(dir / "badcol.csv");
    f << "ts,bmp\n2021-01-01T00:00,1\n";
  }
  CHECK(run_cli("ingest --input " + (dir / "badcol.csv").string() +
                " --fill reject --out " + (dir / "x.csv").string()) == 2);

  {
    // 5 missing rows between 00:00 and 03:00 exceed the ffill cap.
    std::ifstream in(good);
    std::string header, row0;
    std::getline(in, header);
    std::getline(in, row0);
    std::ofstream f(dir / "gap.csv");
    f << header << '\n' << row0 << '\n';
    std::string line;
    bool skipping = true;
    while (std::getline(in, line)) {
      if (skipping && line.rfind("2021-01-01T03:00", 0) != 0) continue;
      skipping = false;
      f << line << '\n';
    }
  }
  CHECK(run_cli("ingest --input " + (dir / "gap.csv").string() +
                " --fill ffill --out " + (dir / "y.csv").string()) == 2);
}

TEST_CASE("cli backtest + report end to end") {
  const fs::path dir = fresh_dir("backtest");
  const std::string data = (dir / "data.csv").string();
  REQUIRE(run_cli("synth --days 12 --seed 9 --out " + data) == 0);
  {
    std::ofstream f(dir / "plan.cfg");
    f << "training_window_days=5\nseed=3\nmodel=naive\n"
      << "test_start=2021-01-12T00:00\ntest_end=2021-01-12T07:30\n";
  }
  const std::string plan = (dir / "plan.cfg").string();

  // One-row metrics for a single model/window.
  CHECK(run_cli("backtest --data " + data + " --config " + plan + " --out " +
                (dir / "run1").string()) == 0);
  const std::string metrics1 = slurp(dir / "run1/metrics.csv");
  CHECK(std::count(metrics1.begin(), metrics1.end(), '\n') == 2);

  // Two models x two windows -> 4 metric rows.
  CHECK(run_cli("backtest --data " + data + " --config " + plan +
                " --models naive,lear --windows 5,7 --out " +
                (dir / "run2").string()) == 0);
  const std::string metrics2 = slurp(dir / "run2/metrics.csv");
  CHECK(std::count(metrics2.begin(), metrics2.end(), '\n') == 5);

  // Identical invocation twice -> identical manifest hashes.
  CHECK(run_cli("backtest --data " + data + " --config " + plan + " --out " +
                (dir / "run1b").string()) == 0);
  auto hash_of = [&](const fs::path& p) {
    const std::string text = slurp(p / "manifest.json");
    const std::string key = "\"manifest_hash\": \"";
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    return text.substr(pos + key.size(), 16);
  };
  CHECK(hash_of(dir / "run1") == hash_of(dir / "run1b"));

  // Plan/data inconsistency -> exit 3.
  {
    std::ofstream f(dir / "bad.cfg");
    f << "training_window_days=5\nnot_a_key=1\n";
  }
  CHECK(run_cli("backtest --data " + data + " --config " +
                (dir / "bad.cfg").string() + " --out " + (dir / "run3").string()) == 3);

  // Report rendering.
  CHECK(run_cli("report --run " + (dir / "run1").string() + " --format svg") == 0);
  CHECK(fs::exists(dir / "run1/hourly.svg"));
  CHECK(fs::exists(dir / "run1/timing.svg"));
  const fs::path empty = fresh_dir("empty_run");
  CHECK(run_cli("report --run " + empty.string() + " --format svg") == 2);
}

TEST_CASE("svg coordinates stay inside the plot area (axis envelope)") {
  auto recs = sample_records();
  const std::string svg = hourly_svg(hourly_breakdown(recs));
  // Every polyline point must lie inside the margins, i.e. the axis range
  // envelopes the data min/max.
  std::regex pts_re("points='([^']*)'");
  auto begin = std::sregex_iterator(svg.begin(), svg.end(), pts_re);
  int n_polylines = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    ++n_polylines;
    std::istringstream coords((*it)[1].str());
    std::string pair;
    while (coords >> pair) {
      const auto comma = pair.find(',');
      REQUIRE(comma != std::string::npos);
      const double px = std::stod(pair.substr(0, comma));
      const double py = std::stod(pair.substr(comma + 1));
      CHECK(px >= 50.0 - 1e-9);
      CHECK(px <= 720.0 - 50.0 + 1e-9);
      CHECK(py >= 50.0 - 1e-9);
      CHECK(py <= 420.0 - 50.0 + 1e-9);
    }
  }
  CHECK(n_polylines == 3);  // price + two model MAE series
}
