#include "bmf/backtester.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "bmf/errors.hpp"
#include "json.hpp"

namespace bmf {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4568bULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int family_id(ModelFamily f) { return static_cast<int>(f); }

template <typename T>
T pick(const std::vector<T>& grid, std::mt19937_64& rng) {
  if (grid.empty()) throw Error(Err::BadConfig, "empty hyperparameter grid");
  std::uniform_int_distribution<std::size_t> u(0, grid.size() - 1);
  return grid[u(rng)];
}

Matrix take_rows(const Matrix& m, std::size_t begin, std::size_t end) {
  Matrix out(end - begin, m.cols());
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i - begin, j) = m(i, j);
  }
  return out;
}

}  // namespace

std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::kNaive: return "naive";
    case ModelFamily::kLear: return "lear";
    case ModelFamily::kRf: return "rf";
    case ModelFamily::kGbt: return "gbt";
    case ModelFamily::kMlp: return "mlp";
  }
  return "?";
}

std::optional<ModelFamily> parse_family(const std::string& name) {
  for (ModelFamily f : {ModelFamily::kNaive, ModelFamily::kLear, ModelFamily::kRf,
                        ModelFamily::kGbt, ModelFamily::kMlp}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

HpChoice sample_hyperparams(ModelFamily family, const SearchSpace& space,
                            std::mt19937_64& rng) {
  HpChoice hp;
  std::ostringstream desc;
  switch (family) {
    case ModelFamily::kRf: {
      hp.rf.n_trees = pick(space.rf_n_trees, rng);
      hp.rf.max_depth = pick(space.rf_max_depth, rng);
      hp.rf.max_features = pick(space.rf_max_features, rng);
      desc << "n_trees=" << hp.rf.n_trees << " max_depth=" << hp.rf.max_depth
           << " max_features=" << hp.rf.max_features;
      break;
    }
    case ModelFamily::kGbt: {
      hp.gbt.n_rounds = pick(space.gbt_rounds, rng);
      hp.gbt.learning_rate = pick(space.gbt_eta, rng);
      hp.gbt.max_depth = pick(space.gbt_depth, rng);
      hp.gbt.lambda_reg = pick(space.gbt_lambda, rng);
      hp.gbt.gamma = pick(space.gbt_gamma, rng);
      hp.gbt.subsample = pick(space.gbt_subsample, rng);
      desc << "n_rounds=" << hp.gbt.n_rounds << " eta=" << hp.gbt.learning_rate
           << " max_depth=" << hp.gbt.max_depth << " lambda=" << hp.gbt.lambda_reg
           << " gamma=" << hp.gbt.gamma << " subsample=" << hp.gbt.subsample;
      break;
    }
    case ModelFamily::kMlp: {
      const int blocks = pick(space.mlp_blocks, rng);
      const int per_block = pick(space.mlp_layers_per_block, rng);
      const int width = pick(space.mlp_width, rng);
      std::vector<std::vector<int>> arch_blocks(blocks, std::vector<int>(per_block, width));
      const double dropout = pick(space.mlp_dropout, rng);
      hp.mlp_arch = MlpArchitecture::from_blocks(arch_blocks, dropout);
      hp.mlp_train.learning_rate = pick(space.mlp_learning_rate, rng);
      hp.mlp_train.batch_size = pick(space.mlp_batch, rng);
      hp.mlp_train.max_epochs = space.mlp_max_epochs;
      hp.mlp_train.patience = space.mlp_patience;
      desc << "blocks=" << blocks << " layers_per_block=" << per_block
           << " width=" << width << " dropout=" << dropout
           << " lr=" << hp.mlp_train.learning_rate
           << " batch=" << hp.mlp_train.batch_size;
      break;
    }
    default:
      break;
  }
  hp.desc = desc.str();
  return hp;
}

std::vector<double> naive_forecast(const SettlementSeries& series, Ts origin_ts) {
  const auto idx = series.index_of(origin_ts);
  if (!idx || *idx < kMinHistory) {
    throw Error(Err::InsufficientHistory,
                "naive forecast needs " + std::to_string(kMinHistory) +
                    " predecessors at " + format_ts(origin_ts));
  }
  std::vector<double> out(kHorizon);
  for (int k = 0; k < kHorizon; ++k) out[k] = series[*idx - 18 + k].v[kBmp];
  return out;
}

namespace {

// Fits the family at the given hyperparameters and returns a predictor
// closure for one feature vector.
std::function<std::vector<double>(std::span<const double>)> fit_family(
    ModelFamily family, const HpChoice& hp, const Matrix& x_full, const Matrix& y_full,
    const Matrix& x_fit, const Matrix& y_fit, const Matrix& x_val, const Matrix& y_val,
    std::uint64_t fit_seed, const LearOptions& lear_opts,
    const std::vector<double>* lear_lambdas) {
  switch (family) {
    case ModelFamily::kLear: {
      auto model = std::make_shared<LearModel>(
          lear_fit_at(x_full, y_full, *lear_lambdas, lear_opts));
      return [model](std::span<const double> x) { return model->predict(x); };
    }
    case ModelFamily::kRf: {
      auto model = std::make_shared<ForestModel>(rf_fit(x_full, y_full, hp.rf, fit_seed));
      return [model](std::span<const double> x) { return model->predict(x); };
    }
    case ModelFamily::kGbt: {
      auto model = std::make_shared<GbtModel>(gbt_fit(x_full, y_full, hp.gbt, fit_seed));
      return [model](std::span<const double> x) { return model->predict(x); };
    }
    case ModelFamily::kMlp: {
      TrainConfig tc = hp.mlp_train;
      tc.seed = fit_seed;
      auto model = std::make_shared<MlpModel>(
          mlp_fit(x_fit, y_fit, x_val, y_val, hp.mlp_arch, tc));
      return [model](std::span<const double> x) { return model->predict(x); };
    }
    default:
      throw Error(Err::BadConfig, "fit_family called for " + family_name(family));
  }
}

}  // namespace

TuningRecord tune(ModelFamily family, const Matrix& x_fit, const Matrix& y_fit,
                  const Matrix& x_val, const Matrix& y_val, const SearchSpace& space,
                  int budget, std::uint64_t seed, std::vector<HpChoice>* choices) {
  if (budget < 1) throw Error(Err::InvalidParam, "tuning budget >= 1");
  const auto t0 = Clock::now();
  TuningRecord record;
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < budget; ++trial) {
    HpChoice hp = sample_hyperparams(family, space, rng);
    TuningTrial t;
    t.params = hp.desc;
    try {
      auto predictor = fit_family(family, hp, x_fit, y_fit, x_fit, y_fit, x_val, y_val,
                                  mix(seed, trial), {}, nullptr);
      double err = 0.0;
      for (std::size_t i = 0; i < x_val.rows(); ++i) {
        const auto pred = predictor(x_val.row(i));
        for (std::size_t o = 0; o < y_val.cols(); ++o) {
          err += std::abs(pred[o] - y_val(i, o));
        }
      }
      t.val_mae = err / (double(x_val.rows()) * double(y_val.cols()));
      if (t.val_mae < best) {
        best = t.val_mae;
        record.selected = trial;
      }
    } catch (const std::exception& e) {
      t.failed = true;
      t.params += std::string(" [failed: ") + e.what() + "]";
    }
    record.trials.push_back(std::move(t));
    if (choices) choices->push_back(std::move(hp));
  }
  if (record.selected < 0) {
    throw Error(Err::TuningFailed, "all " + std::to_string(budget) + " trials failed");
  }
  record.duration_s = seconds_since(t0);
  return record;
}

BacktestRunner::BacktestRunner(const SettlementSeries& series, BacktestPlan plan)
    : series_(series), plan_(std::move(plan)) {
  if (plan_.test_end < plan_.test_start) {
    throw Error(Err::BadConfig, "test_end before test_start");
  }
  if (plan_.retrain_stride_periods != kHorizon) {
    throw Error(Err::BadConfig, "retrain stride must equal the 16-period horizon");
  }
  // Count retrain steps whose 16 targets fit inside the test range.
  total_steps_ = 0;
  while (origin_at(total_steps_) + kTargetOffsetEnd * kPeriodMinutes <= plan_.test_end) {
    ++total_steps_;
  }
  if (total_steps_ == 0) throw Error(Err::InsufficientData, "empty test range");

  // Coverage: every step needs the full training window plus feature margins.
  const Ts first_origin = origin_at(0);
  const int window_periods = plan_.training_window_days * kPeriodsPerDay;
  const Ts earliest_needed =
      first_origin - (kHorizon + window_periods - 1 + kMinHistory) * kPeriodMinutes;
  const Ts last_needed =
      origin_at(total_steps_ - 1) + kTargetOffsetEnd * kPeriodMinutes;
  if (!series_.index_of(earliest_needed) || !series_.index_of(last_needed)) {
    throw Error(Err::InsufficientData,
                "series must cover " + format_ts(earliest_needed) + " .. " +
                    format_ts(last_needed));
  }
  for (ModelFamily f : plan_.models) fam_[family_name(f)] = {};
  report_.plan = plan_;
}

Ts BacktestRunner::origin_at(std::size_t k) const {
  return plan_.test_start - kTargetOffsetStart * kPeriodMinutes +
         static_cast<Ts>(k) * plan_.retrain_stride_periods * kPeriodMinutes;
}

int BacktestRunner::tuning_epoch(std::size_t k) const {
  const long long periods = static_cast<long long>(k) * plan_.retrain_stride_periods;
  return static_cast<int>(periods / (static_cast<long long>(plan_.tune_stride_days) *
                                     kPeriodsPerDay));
}

void BacktestRunner::step() {
  if (done()) return;
  const std::size_t k = step_;
  const Ts origin = origin_at(k);
  for (ModelFamily f : plan_.models) run_family(f, k, origin);
  ++step_;
}

void BacktestRunner::run_family(ModelFamily family, std::size_t k, Ts origin) {
  const std::string name = family_name(family);
  const int epoch = tuning_epoch(k);
  FamilyState& fs = fam_[name];

  try {
    std::vector<double> forecast;
    double fit_s = 0.0;

    if (family == ModelFamily::kNaive) {
      const auto t0 = Clock::now();
      forecast = naive_forecast(series_, origin);
      fit_s = seconds_since(t0);
    } else {
      // Training origins: stride 1 across the window, newest at t-16 so
      // every training target closes before the forecast horizon opens.
      const int window = plan_.training_window_days * kPeriodsPerDay;
      std::vector<Ts> origins(window);
      for (int j = 0; j < window; ++j) {
        origins[j] = origin - static_cast<Ts>(kHorizon + window - 1 - j) * kPeriodMinutes;
      }
      assert(origins.back() + kTargetOffsetEnd * kPeriodMinutes <
             origin + kTargetOffsetStart * kPeriodMinutes);

      Matrix x, y;
      DatasetMeta meta;
      make_dataset(series_, origins, x, y, meta);

      const int val_rows = plan_.validation_days() * kPeriodsPerDay;
      if (val_rows <= 0 || static_cast<std::size_t>(val_rows) >= x.rows()) {
        throw Error(Err::BadConfig, "validation split empty or larger than window");
      }
      const std::size_t split = x.rows() - static_cast<std::size_t>(val_rows);
      const Matrix x_fit = take_rows(x, 0, split);
      const Matrix y_fit = take_rows(y, 0, split);
      const Matrix x_val = take_rows(x, split, x.rows());
      const Matrix y_val = take_rows(y, split, y.rows());

      if (family == ModelFamily::kLear) {
        if (fs.held_lambdas.empty() ||
            k % static_cast<std::size_t>(plan_.lear_lambda_every) == 0) {
          fs.held_lambdas = lear_select_lambdas(x, y, plan_.lear);
        }
      } else if (fs.hp_epoch != epoch) {
        std::vector<HpChoice> choices;
        TuningRecord rec = tune(family, x_fit, y_fit, x_val, y_val, plan_.search,
                                plan_.search.budget,
                                mix(plan_.seed, 1000 * family_id(family) + epoch),
                                &choices);
        rec.epoch_start_ts = origin;
        rec.epoch_id = epoch;
        fs.hp = choices[rec.selected];
        fs.hp_desc = fs.hp.desc;
        fs.hp_epoch = epoch;
        fs.has_hp = true;
        report_.tuning[name].push_back(std::move(rec));
      }

      const auto t0 = Clock::now();
      auto predictor =
          fit_family(family, fs.hp, x, y, x_fit, y_fit, x_val, y_val,
                     mix(plan_.seed, 7919 * family_id(family) + k), plan_.lear,
                     &fs.held_lambdas);
      fit_s = seconds_since(t0);

      const Sample sample = make_sample(series_, origin);
      forecast = predictor(std::span<const double>(sample.x.data(), sample.x.size()));
    }

    report_.fit_seconds[name].push_back(fit_s);
    const auto idx = *series_.index_of(origin);
    for (int h = 0; h < kHorizon; ++h) {
      ForecastRecord r;
      r.origin_ts = origin;
      r.horizon = h;
      r.target_ts = origin + (h + kTargetOffsetStart) * kPeriodMinutes;
      r.y_true = series_[idx + h + kTargetOffsetStart].v[kBmp];
      r.y_pred = forecast[h];
      r.model = name;
      r.training_window = plan_.training_window_days;
      r.tuning_epoch = epoch;
      report_.records.push_back(std::move(r));
    }
  } catch (const Error& e) {
    report_.skipped.push_back({origin, name, e.what()});
  }
}

std::string BacktestRunner::state_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["step"] = step_;
  for (const auto& [name, fs] : fam_) {
    nlohmann::json f;
    f["has_hp"] = fs.has_hp;
    f["hp_epoch"] = fs.hp_epoch;
    f["held_lambdas"] = fs.held_lambdas;
    if (fs.has_hp) {
      f["hp"] = {{"desc", fs.hp.desc},
                 {"rf_n_trees", fs.hp.rf.n_trees},
                 {"rf_max_depth", fs.hp.rf.max_depth},
                 {"rf_max_features", fs.hp.rf.max_features},
                 {"gbt_rounds", fs.hp.gbt.n_rounds},
                 {"gbt_eta", fs.hp.gbt.learning_rate},
                 {"gbt_depth", fs.hp.gbt.max_depth},
                 {"gbt_lambda", fs.hp.gbt.lambda_reg},
                 {"gbt_gamma", fs.hp.gbt.gamma},
                 {"gbt_subsample", fs.hp.gbt.subsample},
                 {"mlp_hidden", fs.hp.mlp_arch.hidden},
                 {"mlp_dropout", fs.hp.mlp_arch.dropout_rate},
                 {"mlp_lr", fs.hp.mlp_train.learning_rate},
                 {"mlp_batch", fs.hp.mlp_train.batch_size},
                 {"mlp_epochs", fs.hp.mlp_train.max_epochs},
                 {"mlp_patience", fs.hp.mlp_train.patience}};
    }
    j["families"][name] = f;
  }
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : report_.records) {
    recs.push_back({r.origin_ts, r.horizon, r.target_ts, r.y_true, r.y_pred, r.model,
                    r.training_window, r.tuning_epoch});
  }
  j["records"] = std::move(recs);
  for (const auto& [name, tuning] : report_.tuning) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& rec : tuning) {
      nlohmann::json trials = nlohmann::json::array();
      for (const auto& t : rec.trials) trials.push_back({t.params, t.val_mae, t.failed});
      list.push_back({{"epoch_start_ts", rec.epoch_start_ts},
                      {"epoch_id", rec.epoch_id},
                      {"selected", rec.selected},
                      {"duration_s", rec.duration_s},
                      {"trials", trials}});
    }
    j["tuning"][name] = std::move(list);
  }
  for (const auto& [name, secs] : report_.fit_seconds) j["fit_seconds"][name] = secs;
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : report_.skipped) skipped.push_back({s.origin_ts, s.model, s.reason});
  j["skipped"] = std::move(skipped);
  return j.dump();
}

void BacktestRunner::restore_state(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  step_ = j["step"].get<std::size_t>();
  for (auto& [name, fs] : fam_) {
    const auto& f = j["families"].at(name);
    fs.has_hp = f["has_hp"].get<bool>();
    fs.hp_epoch = f["hp_epoch"].get<int>();
    fs.held_lambdas = f["held_lambdas"].get<std::vector<double>>();
    if (fs.has_hp) {
      const auto& hp = f["hp"];
      fs.hp.desc = hp["desc"].get<std::string>();
      fs.hp_desc = fs.hp.desc;
      fs.hp.rf.n_trees = hp["rf_n_trees"].get<int>();
      fs.hp.rf.max_depth = hp["rf_max_depth"].get<int>();
      fs.hp.rf.max_features = hp["rf_max_features"].get<double>();
      fs.hp.gbt.n_rounds = hp["gbt_rounds"].get<int>();
      fs.hp.gbt.learning_rate = hp["gbt_eta"].get<double>();
      fs.hp.gbt.max_depth = hp["gbt_depth"].get<int>();
      fs.hp.gbt.lambda_reg = hp["gbt_lambda"].get<double>();
      fs.hp.gbt.gamma = hp["gbt_gamma"].get<double>();
      fs.hp.gbt.subsample = hp["gbt_subsample"].get<double>();
      fs.hp.mlp_arch.hidden = hp["mlp_hidden"].get<std::vector<int>>();
      fs.hp.mlp_arch.dropout_rate = hp["mlp_dropout"].get<double>();
      fs.hp.mlp_train.learning_rate = hp["mlp_lr"].get<double>();
      fs.hp.mlp_train.batch_size = hp["mlp_batch"].get<int>();
      fs.hp.mlp_train.max_epochs = hp["mlp_epochs"].get<int>();
      fs.hp.mlp_train.patience = hp["mlp_patience"].get<int>();
    }
  }
  report_.records.clear();
  for (const auto& r : j["records"]) {
    ForecastRecord rec;
    rec.origin_ts = r[0].get<Ts>();
    rec.horizon = r[1].get<int>();
    rec.target_ts = r[2].get<Ts>();
    rec.y_true = r[3].get<double>();
    rec.y_pred = r[4].get<double>();
    rec.model = r[5].get<std::string>();
    rec.training_window = r[6].get<int>();
    rec.tuning_epoch = r[7].get<int>();
    report_.records.push_back(std::move(rec));
  }
  report_.tuning.clear();
  if (j.contains("tuning")) {
    for (auto it = j["tuning"].begin(); it != j["tuning"].end(); ++it) {
      for (const auto& rec : it.value()) {
        TuningRecord t;
        t.epoch_start_ts = rec["epoch_start_ts"].get<Ts>();
        t.epoch_id = rec["epoch_id"].get<int>();
        t.selected = rec["selected"].get<int>();
        t.duration_s = rec["duration_s"].get<double>();
        for (const auto& tr : rec["trials"]) {
          t.trials.push_back({tr[0].get<std::string>(), tr[1].get<double>(),
                              tr[2].get<bool>()});
        }
        report_.tuning[it.key()].push_back(std::move(t));
      }
    }
  }
  report_.fit_seconds.clear();
  if (j.contains("fit_seconds")) {
    for (auto it = j["fit_seconds"].begin(); it != j["fit_seconds"].end(); ++it) {
      report_.fit_seconds[it.key()] = it.value().get<std::vector<double>>();
    }
  }
  report_.skipped.clear();
  for (const auto& s : j["skipped"]) {
    report_.skipped.push_back(
        {s[0].get<Ts>(), s[1].get<std::string>(), s[2].get<std::string>()});
  }
}

BacktestReport run_backtest(const SettlementSeries& series, const BacktestPlan& plan) {
  BacktestRunner runner(series, plan);
  while (!runner.done()) runner.step();
  return runner.report();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

}  // namespace

BacktestPlan parse_plan(const std::string& text) {
  BacktestPlan plan;
  bool have_start = false, have_end = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(Err::BadConfig, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "training_window_days") {
        plan.training_window_days = std::stoi(value);
      } else if (key == "retrain_stride_periods") {
        plan.retrain_stride_periods = std::stoi(value);
      } else if (key == "tune_stride_days") {
        plan.tune_stride_days = std::stoi(value);
      } else if (key == "validation_cap_days") {
        plan.validation_cap_days = std::stoi(value);
      } else if (key == "seed") {
        plan.seed = std::stoull(value);
      } else if (key == "test_start") {
        plan.test_start = parse_ts(value);
        have_start = true;
      } else if (key == "test_end") {
        plan.test_end = parse_ts(value);
        have_end = true;
      } else if (key == "model") {
        plan.models.clear();
        for (const auto& name : split(value, ',')) {
          const auto f = parse_family(trim(name));
          if (!f) throw Error(Err::BadConfig, "unknown model '" + trim(name) + "'");
          plan.models.push_back(*f);
        }
      } else if (key == "budget") {
        plan.search.budget = std::stoi(value);
      } else if (key == "rf_n_trees") {
        plan.search.rf_n_trees.clear();
        for (const auto& v : split(value, ',')) plan.search.rf_n_trees.push_back(std::stoi(v));
      } else if (key == "rf_max_depth") {
        plan.search.rf_max_depth.clear();
        for (const auto& v : split(value, ',')) plan.search.rf_max_depth.push_back(std::stoi(v));
      } else if (key == "gbt_rounds") {
        plan.search.gbt_rounds.clear();
        for (const auto& v : split(value, ',')) plan.search.gbt_rounds.push_back(std::stoi(v));
      } else if (key == "gbt_depth") {
        plan.search.gbt_depth.clear();
        for (const auto& v : split(value, ',')) plan.search.gbt_depth.push_back(std::stoi(v));
      } else if (key == "mlp_width") {
        plan.search.mlp_width.clear();
        for (const auto& v : split(value, ',')) plan.search.mlp_width.push_back(std::stoi(v));
      } else if (key == "mlp_max_epochs") {
        plan.search.mlp_max_epochs = std::stoi(value);
      } else if (key == "mlp_patience") {
        plan.search.mlp_patience = std::stoi(value);
      } else {
        throw Error(Err::BadConfig, "unknown key '" + key + "'");
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error(Err::BadConfig, "bad value for '" + key + "' at line " +
                                      std::to_string(lineno));
    }
  }
  if (!have_start || !have_end) {
    throw Error(Err::BadConfig, "test_start and test_end are required");
  }
  return plan;
}

BacktestPlan parse_plan_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace bmf
