#include "bmf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bmf/errors.hpp"
#include "json.hpp"

namespace bmf {

namespace {

constexpr const char* kCodeVersion = "bmforecast 0.1.0";

std::string fmt(double d) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  (void)ec;
  return std::string(buf, p);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::IoError, "cannot write " + path);
  out << text;
}

}  // namespace

std::uint64_t fnv1a(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return fnv1a(std::span<const char>(s.data(), s.size()));
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string forecasts_csv(std::span<const ForecastRecord> records) {
  std::string out = "origin_ts,horizon,target_ts,y_true,y_pred,model,training_window,tuning_epoch\n";
  for (const auto& r : records) {
    out += format_ts(r.origin_ts);
    out += ',' + std::to_string(r.horizon);
    out += ',' + format_ts(r.target_ts);
    out += ',' + fmt(r.y_true);
    out += ',' + fmt(r.y_pred);
    out += ',' + r.model;
    out += ',' + std::to_string(r.training_window);
    out += ',' + std::to_string(r.tuning_epoch);
    out += '\n';
  }
  return out;
}

std::string metrics_csv(std::span<const ForecastRecord> records) {
  std::map<std::pair<std::string, int>, std::vector<ForecastRecord>> groups;
  for (const auto& r : records) groups[{r.model, r.training_window}].push_back(r);
  std::string out = "model,training_window_days,mae,rmse,smape,n\n";
  for (const auto& [key, recs] : groups) {
    const MetricSet m = metrics(recs);
    out += key.first + ',' + std::to_string(key.second) + ',' + fmt(m.mae) + ',' +
           fmt(m.rmse) + ',' + fmt(m.smape) + ',' + std::to_string(m.n) + '\n';
  }
  return out;
}

std::string hourly_csv(const HourlyBreakdown& hb) {
  std::string out = "hour,mean_price,sd_price";
  for (const auto& [model, _] : hb.model_mae) out += ",mae_" + model;
  out += '\n';
  for (int h = 0; h < 24; ++h) {
    out += std::to_string(h) + ',' + fmt(hb.mean_price[h]) + ',' + fmt(hb.sd_price[h]);
    for (const auto& [model, mae_by_hour] : hb.model_mae) out += ',' + fmt(mae_by_hour[h]);
    out += '\n';
  }
  return out;
}

std::string dm_matrix_csv(const DmMatrix& m) {
  std::string out = "model";
  for (const auto& name : m.models) out += ',' + name;
  out += '\n';
  for (std::size_t a = 0; a < m.models.size(); ++a) {
    out += m.models[a];
    for (std::size_t b = 0; b < m.models.size(); ++b) {
      out += ',';
      if (a == b) continue;
      const auto& c = m.cell[a][b];
      out += c.degenerate ? "nd" : (c.reject ? "1" : "0");
    }
    out += '\n';
  }
  return out;
}

std::string timing_csv(const std::map<std::string, std::vector<double>>& fit_seconds) {
  std::string out = "model,n_fits,total_s,mean_s\n";
  for (const auto& [model, secs] : fit_seconds) {
    double total = 0.0;
    for (double s : secs) total += s;
    const double mean = secs.empty() ? 0.0 : total / static_cast<double>(secs.size());
    out += model + ',' + std::to_string(secs.size()) + ',' + fmt(total) + ',' + fmt(mean) + '\n';
  }
  return out;
}

namespace {

constexpr int kSvgW = 720, kSvgH = 420, kMargin = 50;
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2"};

double scale_x(double v, double lo, double hi) {
  return kMargin + (v - lo) / (hi - lo) * (kSvgW - 2 * kMargin);
}
double scale_y(double v, double lo, double hi) {
  return kSvgH - kMargin - (v - lo) / (hi - lo) * (kSvgH - 2 * kMargin);
}

}  // namespace

std::string hourly_svg(const HourlyBreakdown& hb) {
  double ymin = 0.0, ymax = 1.0;
  bool first = true;
  auto widen = [&](double v) {
    if (first) {
      ymin = ymax = v;
      first = false;
    } else {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  };
  for (int h = 0; h < 24; ++h) widen(hb.mean_price[h]);
  for (const auto& [_, mae] : hb.model_mae) {
    for (int h = 0; h < 24; ++h) widen(mae[h]);
  }
  if (ymax == ymin) ymax = ymin + 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kSvgW << "' height='"
      << kSvgH << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<line x1='" << kMargin << "' y1='" << kSvgH - kMargin << "' x2='"
      << kSvgW - kMargin << "' y2='" << kSvgH - kMargin << "' stroke='black'/>\n";
  svg << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin
      << "' y2='" << kSvgH - kMargin << "' stroke='black'/>\n";
  svg << "<text x='" << kMargin << "' y='" << kMargin - 10 << "' font-size='12'>"
      << "hourly price and per-model MAE, y range [" << ymin << ", " << ymax
      << "]</text>\n";

  auto polyline = [&](const std::array<double, 24>& data, const char* color,
                      const std::string& label, int idx) {
    svg << "<polyline fill='none' stroke='" << color << "' data-series='" << label
        << "' points='";
    for (int h = 0; h < 24; ++h) {
      svg << scale_x(h, 0, 23) << ',' << scale_y(data[h], ymin, ymax) << ' ';
    }
    svg << "'/>\n";
    svg << "<text x='" << kSvgW - kMargin + 4 << "' y='" << kMargin + 14 * idx
        << "' font-size='10' fill='" << color << "'>" << label << "</text>\n";
  };
  int idx = 0;
  polyline(hb.mean_price, "#000000", "price", idx++);
  for (const auto& [model, mae] : hb.model_mae) {
    polyline(mae, kPalette[idx % 7], "mae_" + model, idx);
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string timing_svg(const std::map<std::string, std::vector<double>>& fit_seconds) {
  std::vector<std::pair<std::string, double>> means;
  for (const auto& [model, secs] : fit_seconds) {
    double total = 0.0;
    for (double s : secs) total += s;
    means.emplace_back(model, secs.empty() ? 0.0 : total / double(secs.size()));
  }
  double ymax = 1e-9;
  for (const auto& [_, m] : means) ymax = std::max(ymax, m);

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kSvgW << "' height='"
      << kSvgH << "'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << kMargin << "' y='" << kMargin - 10
      << "' font-size='12'>mean fit seconds per model, y range [0, " << ymax
      << "]</text>\n";
  const double band = double(kSvgW - 2 * kMargin) / double(std::max<std::size_t>(1, means.size()));
  for (std::size_t i = 0; i < means.size(); ++i) {
    const double h = means[i].second / ymax * (kSvgH - 2 * kMargin);
    const double x = kMargin + band * double(i) + band * 0.15;
    svg << "<rect x='" << x << "' y='" << kSvgH - kMargin - h << "' width='"
        << band * 0.7 << "' height='" << h << "' fill='" << kPalette[i % 7] << "'/>\n";
    svg << "<text x='" << x << "' y='" << kSvgH - kMargin + 14 << "' font-size='10'>"
        << means[i].first << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["code_version"] = code_version;
  j["config"] = config_text;
  j["dataset_hash"] = dataset_hash;
  j["seed"] = seed;
  for (const auto& [name, hash] : outputs) {
    j["outputs"].push_back({{"file", name}, {"hash", hash}});
  }
  j["volatile_outputs"] = volatile_outputs;
  j["manifest_hash"] = manifest_hash();
  nlohmann::json stages;
  for (const auto& [stage, secs] : stage_seconds) stages[stage] = secs;
  j["stage_seconds_volatile"] = std::move(stages);
  return j.dump(2) + "\n";
}

std::string RunManifest::manifest_hash() const {
  std::string blob = code_version + '\n' + config_text + '\n' + dataset_hash + '\n' +
                     std::to_string(seed) + '\n';
  for (const auto& [name, hash] : outputs) blob += name + '=' + hash + '\n';
  return hash_hex(fnv1a(std::span<const char>(blob.data(), blob.size())));
}

namespace {

std::string tuning_csv(const std::map<std::string, std::vector<TuningRecord>>& tuning) {
  std::string out = "model,epoch_id,trial,params,val_mae,failed,selected\n";
  for (const auto& [model, recs] : tuning) {
    for (const auto& rec : recs) {
      for (std::size_t t = 0; t < rec.trials.size(); ++t) {
        const auto& trial = rec.trials[t];
        std::string params = trial.params;
        std::replace(params.begin(), params.end(), ',', ';');
        out += model + ',' + std::to_string(rec.epoch_id) + ',' + std::to_string(t) +
               ',' + params + ',' + fmt(trial.val_mae) + ',' +
               (trial.failed ? "1" : "0") + ',' +
               (static_cast<int>(t) == rec.selected ? "1" : "0") + '\n';
      }
    }
  }
  return out;
}

}  // namespace

RunManifest write_report_bundle(const BacktestReport& report, const std::string& out_dir,
                                const std::string& config_text,
                                const std::string& dataset_hash) {
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.config_text = config_text;
  manifest.dataset_hash = dataset_hash;
  manifest.code_version = kCodeVersion;
  manifest.seed = report.plan.seed;

  auto emit = [&](const std::string& name, const std::string& text, bool is_volatile) {
    write_file(out_dir + "/" + name, text);
    if (is_volatile) {
      manifest.volatile_outputs.push_back(name);
    } else {
      manifest.outputs.emplace_back(
          name, hash_hex(fnv1a(std::span<const char>(text.data(), text.size()))));
    }
  };

  emit("forecasts.csv", forecasts_csv(report.records), false);
  emit("metrics.csv", metrics_csv(report.records), false);

  if (!report.records.empty()) {
    const HourlyBreakdown hb = hourly_breakdown(report.records);
    emit("hourly.csv", hourly_csv(hb), false);
    try {
      emit("dm_matrix.csv", dm_matrix_csv(dm_matrix(report.records)), false);
    } catch (const Error&) {
      // Fewer than two comparable models, or unequal record sets after skips.
      emit("dm_matrix.csv", "model\n", false);
    }
  }
  emit("tuning.csv", tuning_csv(report.tuning), false);
  emit("timing.csv", timing_csv(report.fit_seconds), true);

  {
    std::string skipped = "origin_ts,model,reason\n";
    for (const auto& s : report.skipped) {
      std::string reason = s.reason;
      std::replace(reason.begin(), reason.end(), ',', ';');
      skipped += format_ts(s.origin_ts) + ',' + s.model + ',' + reason + '\n';
    }
    emit("skipped.csv", skipped, false);
  }

  write_file(out_dir + "/manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace bmf
