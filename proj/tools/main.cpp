#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bmf/backtester.hpp"
#include "bmf/errors.hpp"
#include "bmf/report.hpp"
#include "bmf/timeseries.hpp"

namespace fs = std::filesystem;
using namespace bmf;

namespace {

std::atomic<bool> g_interrupted{false};

void on_sigint(int) { g_interrupted.store(true); }

int exit_code_for(Err kind) {
  switch (kind) {
    case Err::BadConfig:
      return 3;
    case Err::RankDeficiency:
    case Err::NonFiniteLoss:
    case Err::TuningFailed:
    case Err::DegenerateVariance:
      return 4;
    default:
      return 2;
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

int cmd_ingest(const std::string& input, const std::string& fill, const std::string& out) {
  const FillPolicy policy = fill == "ffill" ? FillPolicy::kForwardFill : FillPolicy::kReject;
  IngestStats stats;
  const SettlementSeries series = ingest_csv(input, policy, &stats);
  write_csv(series, out);
  std::cout << "rows: " << stats.rows << "\nfilled_cells: " << stats.filled_cells
            << "\nfilled_rows: " << stats.filled_rows << "\n";
  return 0;
}

int cmd_synth(int days, std::uint64_t seed, double spike_prob, const std::string& out) {
  const SettlementSeries series = synthesize(days, seed, spike_prob);
  write_csv(series, out);
  std::cout << "rows: " << series.size() << "\n";
  return 0;
}

int cmd_backtest(const std::string& data, const std::string& config,
                 const std::string& models, const std::string& windows,
                 const std::string& out_dir, const std::string& resume,
                 bool checkpoint_only) {
  const std::string config_text = read_text(config);
  BacktestPlan base = parse_plan(config_text);
  if (!models.empty()) {
    base.models.clear();
    for (const auto& name : split(models, ',')) {
      auto fam = parse_family(name);
      if (!fam) throw Error(Err::BadConfig, "unknown model family: " + name);
      base.models.push_back(*fam);
    }
  }
  std::vector<int> window_list{base.training_window_days};
  if (!windows.empty()) {
    window_list.clear();
    for (const auto& w : split(windows, ',')) window_list.push_back(std::stoi(w));
  }

  const SettlementSeries series = ingest_csv(data, FillPolicy::kReject);

  BacktestReport merged;
  merged.plan = base;
  for (int w : window_list) {
    BacktestPlan plan = base;
    plan.training_window_days = w;
    BacktestRunner runner(series, plan);
    if (!resume.empty()) runner.restore_state(read_text(resume));
    while (!runner.done()) {
      if (g_interrupted.load()) {
        fs::create_directories(out_dir);
        std::ofstream ck(out_dir + "/checkpoint.json", std::ios::binary);
        ck << runner.state_json();
        std::cout << "interrupted at step " << runner.next_step() << " of "
                  << runner.total_steps() << "; checkpoint written\n";
        return 0;
      }
      runner.step();
    }
    const BacktestReport& r = runner.report();
    merged.records.insert(merged.records.end(), r.records.begin(), r.records.end());
    for (const auto& [m, recs] : r.tuning) {
      auto& dst = merged.tuning[m];
      dst.insert(dst.end(), recs.begin(), recs.end());
    }
    for (const auto& [m, secs] : r.fit_seconds) {
      auto& dst = merged.fit_seconds[m];
      dst.insert(dst.end(), secs.begin(), secs.end());
    }
    merged.skipped.insert(merged.skipped.end(), r.skipped.begin(), r.skipped.end());
  }
  if (checkpoint_only) return 0;

  try {
    write_report_bundle(merged, out_dir, config_text, hash_hex(fnv1a_file(data)));
  } catch (...) {
    // Never leave a half-written bundle behind.
    for (const char* f : {"forecasts.csv", "metrics.csv", "hourly.csv", "dm_matrix.csv",
                          "tuning.csv", "timing.csv", "skipped.csv", "manifest.json"}) {
      std::error_code ec;
      fs::remove(fs::path(out_dir) / f, ec);
    }
    throw;
  }
  std::cout << "forecast points: " << merged.records.size() << "\n";
  return 0;
}

HourlyBreakdown parse_hourly_csv(const std::string& text) {
  HourlyBreakdown hb;
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw Error(Err::IoError, "empty hourly.csv");
  const auto cols = split(line, ',');
  if (cols.size() < 3 || cols[0] != "hour")
    throw Error(Err::IoError, "malformed hourly.csv header");
  std::vector<std::string> model_cols(cols.begin() + 3, cols.end());
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto vals = split(line, ',');
    if (vals.size() != cols.size()) throw Error(Err::IoError, "malformed hourly.csv row");
    const int h = std::stoi(vals[0]);
    if (h < 0 || h > 23) throw Error(Err::IoError, "hour out of range in hourly.csv");
    hb.mean_price[h] = std::stod(vals[1]);
    hb.sd_price[h] = std::stod(vals[2]);
    for (std::size_t m = 0; m < model_cols.size(); ++m) {
      std::string name = model_cols[m];
      if (name.rfind("mae_", 0) == 0) name = name.substr(4);
      hb.model_mae[name][h] = std::stod(vals[3 + m]);
    }
  }
  return hb;
}

std::map<std::string, std::vector<double>> parse_timing_csv(const std::string& text) {
  std::map<std::string, std::vector<double>> out;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto vals = split(line, ',');
    if (vals.size() != 4) throw Error(Err::IoError, "malformed timing.csv row");
    out[vals[0]] = std::vector<double>{std::stod(vals[3])};
  }
  return out;
}

int cmd_report(const std::string& run_dir, const std::string& format) {
  const fs::path dir(run_dir);
  const fs::path hourly_path = dir / "hourly.csv";
  const fs::path timing_path = dir / "timing.csv";
  if (!fs::exists(hourly_path) || !fs::exists(timing_path))
    throw Error(Err::IoError, "run directory lacks hourly.csv/timing.csv");
  if (format == "csv") {
    std::cout << "hourly: " << hourly_path.string() << "\ntiming: " << timing_path.string()
              << "\n";
    return 0;
  }
  const HourlyBreakdown hb = parse_hourly_csv(read_text(hourly_path.string()));
  const auto timing = parse_timing_csv(read_text(timing_path.string()));
  {
    std::ofstream out(dir / "hourly.svg", std::ios::binary);
    out << hourly_svg(hb);
  }
  {
    std::ofstream out(dir / "timing.svg", std::ios::binary);
    out << timing_svg(timing);
  }
  std::cout << "wrote hourly.svg, timing.svg\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);

  CLI::App app{"Balancing-market price forecasting and walk-forward backtesting"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a raw CSV");
  std::string in_input, in_fill = "reject", in_out;
  ingest->add_option("--input", in_input)->required();
  ingest->add_option("--fill", in_fill)->check(CLI::IsMember({"reject", "ffill"}));
  ingest->add_option("--out", in_out)->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  int sy_days = 2;
  std::uint64_t sy_seed = 0;
  double sy_spike = 0.0;
  std::string sy_out;
  synth->add_option("--days", sy_days)->required();
  synth->add_option("--seed", sy_seed)->required();
  synth->add_option("--spike-prob", sy_spike);
  synth->add_option("--out", sy_out)->required();

  auto* backtest = app.add_subcommand("backtest", "Run a walk-forward backtest");
  std::string bt_data, bt_config, bt_models, bt_windows, bt_out, bt_resume;
  backtest->add_option("--data", bt_data)->required();
  backtest->add_option("--config", bt_config)->required();
  backtest->add_option("--models", bt_models, "Comma list overriding the plan's model set");
  backtest->add_option("--windows", bt_windows, "Comma list of training windows in days");
  backtest->add_option("--out", bt_out)->required();
  backtest->add_option("--resume", bt_resume, "Checkpoint JSON to resume from");

  auto* report = app.add_subcommand("report", "Render charts from a run directory");
  std::string rp_run, rp_format = "svg";
  report->add_option("--run", rp_run)->required();
  report->add_option("--format", rp_format)->check(CLI::IsMember({"csv", "svg"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(in_input, in_fill, in_out);
    if (*synth) return cmd_synth(sy_days, sy_seed, sy_spike, sy_out);
    if (*backtest)
      return cmd_backtest(bt_data, bt_config, bt_models, bt_windows, bt_out, bt_resume, false);
    if (*report) return cmd_report(rp_run, rp_format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
