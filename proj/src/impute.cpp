#include "vm/impute.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "vm/error.hpp"
#include "vm/random.hpp"

namespace vm {

namespace {

constexpr std::uint8_t kHoldoutStream = 0x11;

double signed_log1p(double v) { return v < 0 ? -std::log1p(-v) : std::log1p(v); }

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;
};

Standardizer fit_standardizer(const std::vector<std::vector<double>>& rows, const std::vector<std::size_t>& idx) {
  const std::size_t p = rows.front().size();
  Standardizer s{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  for (auto i : idx) {
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += rows[i][j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(idx.size());
  for (auto i : idx) {
    for (std::size_t j = 0; j < p; ++j) s.sd[j] += (rows[i][j] - s.mean[j]) * (rows[i][j] - s.mean[j]);
  }
  for (auto& v : s.sd) {
    v = std::sqrt(v / static_cast<double>(idx.size()));
    if (!(v > 1e-12)) v = 1.0;  // constant column: centered to zero
  }
  return s;
}

std::vector<double> standardize(const std::vector<double>& row, const std::vector<double>& mean,
                                const std::vector<double>& sd) {
  std::vector<double> z(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - mean[j]) / sd[j];
  return z;
}

struct RidgeFit {
  double intercept = 0.0;
  std::vector<double> weights;
};

RidgeFit fit_ridge(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
                   const std::vector<std::size_t>& idx, const Standardizer& st, double lambda) {
  const std::size_t p = st.mean.size();
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd Z(n, static_cast<Eigen::Index>(p));
  Eigen::VectorXd t(n);
  double ybar = 0.0;
  for (auto i : idx) ybar += y[i];
  ybar /= static_cast<double>(idx.size());
  for (Eigen::Index r = 0; r < n; ++r) {
    auto z = standardize(rows[idx[static_cast<std::size_t>(r)]], st.mean, st.sd);
    for (std::size_t j = 0; j < p; ++j) Z(r, static_cast<Eigen::Index>(j)) = z[j];
    t(r) = y[idx[static_cast<std::size_t>(r)]] - ybar;
  }
  Eigen::MatrixXd A = Z.transpose() * Z;
  A.diagonal().array() += lambda;
  Eigen::VectorXd w = A.ldlt().solve(Z.transpose() * t);
  RidgeFit fit;
  fit.intercept = ybar;
  fit.weights.assign(w.data(), w.data() + w.size());
  return fit;
}

double ridge_predict(const RidgeFit& fit, const std::vector<double>& z) {
  double v = fit.intercept;
  for (std::size_t j = 0; j < z.size(); ++j) v += fit.weights[j] * z[j];
  return v;
}

double knn_predict(const std::vector<std::vector<double>>& points, const std::vector<double>& targets, int k,
                   const std::vector<double>& z) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) d += (points[i][j] - z[j]) * (points[i][j] - z[j]);
    dist.emplace_back(d, i);
  }
  const auto kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 1)), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  double s = 0.0;
  for (std::size_t i = 0; i < kk; ++i) s += targets[dist[i].second];
  return s / static_cast<double>(kk);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string_view kind_name(ImputerKind k) { return k == ImputerKind::ridge ? "ridge" : "knn"; }

// Rounds of the org dated strictly before `round_index` in (date, round_id) order.
std::vector<const FundingRound*> history_of(const Dataset& data, std::size_t round_index) {
  const auto& r = data.rounds()[round_index];
  std::vector<const FundingRound*> hist;
  for (auto i : data.rounds_of(r.org_id)) {
    if (i == round_index) break;
    hist.push_back(&data.rounds()[i]);
  }
  return hist;
}

}  // namespace

PmvFeatureVector build_features(const FundingRound& round, const std::vector<const FundingRound*>& history,
                                const Organization* org) {
  PmvFeatureVector x;
  x.T = days_since_feature_epoch(round.date);
  x.M = round.amount_musd * 1e6;
  if (!history.empty()) {
    const FundingRound& prev = *history.back();
    x.dT = round.date - prev.date;
    x.dM = x.M - prev.amount_musd * 1e6;
  }
  x.N = round.investor_count;
  x.R = round.lead_investor_rank.value_or(0);
  if (org) {
    if (!org->sectors.empty()) x.S = *org->sectors.begin();
    x.G = org->country;
  }
  return x;
}

FeatureEncoder FeatureEncoder::fit(const std::vector<PmvFeatureVector>& rows, std::size_t top_k) {
  std::map<std::string, std::size_t> freq;
  for (const auto& r : rows) {
    if (!r.G.empty()) ++freq[r.G];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> countries;
  for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) countries.push_back(ranked[i].first);
  return FeatureEncoder(std::move(countries));
}

std::size_t FeatureEncoder::width() const { return kNumeric + kSectorColumns + countries_.size() + 1; }

std::vector<double> FeatureEncoder::encode(const PmvFeatureVector& x) const {
  std::vector<double> row(width(), 0.0);
  row[0] = x.T;
  row[1] = std::log1p(x.dT);
  row[2] = std::log1p(x.M);
  row[3] = signed_log1p(x.dM);
  row[4] = std::log1p(static_cast<double>(x.N));
  row[5] = static_cast<double>(x.R);
  std::size_t sector_col = x.S ? static_cast<std::size_t>(*x.S) : kSectorCount;
  row[kNumeric + sector_col] = 1.0;
  auto it = std::find(countries_.begin(), countries_.end(), x.G);
  std::size_t country_col = static_cast<std::size_t>(it - countries_.begin());  // == size() means "other"
  row[kNumeric + kSectorColumns + country_col] = 1.0;
  return row;
}

double ImputerModel::predict_log(const PmvFeatureVector& x) const {
  auto z = standardize(encoder.encode(x), mean, sd);
  if (kind == ImputerKind::knn) return knn_predict(points, targets, k, z);
  double v = intercept;
  for (std::size_t j = 0; j < z.size(); ++j) v += weights[j] * z[j];
  return v;
}

std::string ImputerModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "vmetrics-imputer";
  j["version"] = 1;
  j["kind"] = kind_name(kind);
  j["target"] = "ln_pmv_usd";
  j["countries"] = encoder.countries();
  j["mean"] = mean;
  j["sd"] = sd;
  if (kind == ImputerKind::ridge) {
    j["lambda"] = lambda;
    j["intercept"] = intercept;
    j["weights"] = weights;
  } else {
    j["k"] = k;
    j["points"] = points;
    j["targets"] = targets;
  }
  return j.dump(1) + "\n";
}

ImputerModel ImputerModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("imputer model is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "vmetrics-imputer" || j.value("version", 0) != 1) {
    throw ConfigError("unsupported imputer model format");
  }
  ImputerModel m;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "ridge" && kind != "knn") throw ConfigError("unknown imputer kind '" + kind + "'");
  m.kind = kind == "ridge" ? ImputerKind::ridge : ImputerKind::knn;
  m.encoder = FeatureEncoder(j.at("countries").get<std::vector<std::string>>());
  m.mean = j.at("mean").get<std::vector<double>>();
  m.sd = j.at("sd").get<std::vector<double>>();
  if (m.mean.size() != m.encoder.width() || m.sd.size() != m.encoder.width()) {
    throw ConfigError("imputer model standardization does not match its feature layout");
  }
  if (m.kind == ImputerKind::ridge) {
    m.lambda = j.at("lambda").get<double>();
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.encoder.width()) throw ConfigError("imputer weights do not match feature layout");
  } else {
    m.k = j.at("k").get<int>();
    m.points = j.at("points").get<std::vector<std::vector<double>>>();
    m.targets = j.at("targets").get<std::vector<double>>();
  }
  return m;
}

FitResult fit_imputer(const std::vector<LabeledRow>& labeled, const ImputerConfig& config) {
  const std::size_t n = labeled.size();
  if (n < config.min_labeled) {
    throw InsufficientData("imputer needs at least " + std::to_string(config.min_labeled) +
                           " rounds with an observed PMV, got " + std::to_string(n) +
                           "; rerun with imputation disabled (passthrough mode)");
  }
  for (const auto& r : labeled) {
    if (!(r.pmv_usd > 0) || !std::isfinite(r.pmv_usd)) throw DomainError("labeled PMV must be positive");
  }

  auto perm = shuffled_indices(n, config.seed, stream_id(kHoldoutStream, 0, 0));
  const auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.holdout_fraction));
  std::vector<std::size_t> holdout(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_hold), perm.end());

  // Country vocabulary from the training split only.
  std::vector<PmvFeatureVector> train_x;
  for (auto i : train) train_x.push_back(labeled[i].x);
  FeatureEncoder encoder = FeatureEncoder::fit(train_x, config.top_countries);

  std::vector<std::vector<double>> rows(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = encoder.encode(labeled[i].x);
    y[i] = std::log(labeled[i].pmv_usd);
  }

  ImputerModel model;
  model.kind = config.kind;
  model.encoder = encoder;
  Standardizer st = fit_standardizer(rows, train);
  model.mean = st.mean;
  model.sd = st.sd;

  if (config.kind == ImputerKind::ridge) {
    double best_lambda = config.lambdas.front();
    double best_sse = std::numeric_limits<double>::infinity();
    const auto folds = static_cast<std::size_t>(std::max(config.folds, 2));
    for (double lambda : config.lambdas) {
      double sse = 0.0;
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_idx, val_idx;
        for (std::size_t pos = 0; pos < train.size(); ++pos) {
          (pos % folds == f ? val_idx : fit_idx).push_back(train[pos]);
        }
        if (fit_idx.empty() || val_idx.empty()) continue;
        Standardizer fst = fit_standardizer(rows, fit_idx);
        RidgeFit rf = fit_ridge(rows, y, fit_idx, fst, lambda);
        for (auto i : val_idx) {
          double e = ridge_predict(rf, standardize(rows[i], fst.mean, fst.sd)) - y[i];
          sse += e * e;
        }
      }
      if (sse < best_sse) {
        best_sse = sse;
        best_lambda = lambda;
      }
    }
    RidgeFit rf = fit_ridge(rows, y, train, st, best_lambda);
    model.lambda = best_lambda;
    model.intercept = rf.intercept;
    model.weights = rf.weights;
  } else {
    model.k = config.knn_k;
    for (auto i : train) {
      model.points.push_back(standardize(rows[i], st.mean, st.sd));
      model.targets.push_back(y[i]);
    }
  }

  ImputationReport report;
  report.n_train = train.size();
  report.n_holdout = holdout.size();
  report.selected_lambda = model.lambda;
  std::vector<double> abs_err;
  std::map<std::string, double> sector_sum;
  for (auto i : holdout) {
    double e = std::abs(model.predict_log(labeled[i].x) - y[i]);
    abs_err.push_back(e);
    std::string key = labeled[i].x.S ? std::string(sector_name(*labeled[i].x.S)) : "Other";
    sector_sum[key] += e;
    ++report.sector_count[key];
  }
  if (!abs_err.empty()) {
    report.holdout_mae = std::accumulate(abs_err.begin(), abs_err.end(), 0.0) / static_cast<double>(abs_err.size());
    report.holdout_median_ae = median_of(abs_err);
  }
  for (const auto& [key, sum] : sector_sum) {
    report.sector_mae[key] = sum / static_cast<double>(report.sector_count[key]);
  }
  return FitResult{std::move(model), std::move(report)};
}

double predict_pmv(const ImputerModel& model, const PmvFeatureVector& x) { return std::exp(model.predict_log(x)); }

std::vector<LabeledRow> labeled_rows(const Dataset& data) {
  std::vector<LabeledRow> out;
  for (std::size_t i = 0; i < data.rounds().size(); ++i) {
    const auto& r = data.rounds()[i];
    if (r.pmv_provenance != Provenance::observed || !r.pmv_musd) continue;
    out.push_back({build_features(r, history_of(data, i), data.find_org(r.org_id)), *r.pmv_musd * 1e6});
  }
  return out;
}

ImputeOutcome impute_dataset(const Dataset& data, const ImputerModel& model) {
  ImputeOutcome outcome;
  std::vector<FundingRound> rounds = data.rounds();
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    auto& r = rounds[i];
    if (r.pmv_musd) continue;
    auto x = build_features(r, history_of(data, i), data.find_org(r.org_id));
    r.pmv_musd = predict_pmv(model, x) / 1e6;
    r.pmv_provenance = Provenance::imputed;
    ++outcome.rounds_imputed;
  }
  std::vector<ExitEvent> exits = data.exits();
  for (auto& e : exits) {
    if (!e.pending_value()) continue;
    const auto& idx = data.rounds_of(e.org_id);
    std::optional<std::size_t> last;
    for (auto i : idx) {
      if (data.rounds()[i].date <= e.date) last = i;
    }
    if (!last) {
      ++outcome.exits_unresolved;
      continue;
    }
    auto x = build_features(data.rounds()[*last], history_of(data, *last), data.find_org(e.org_id));
    e.exit_value_musd = predict_pmv(model, x) / 1e6;
    e.value_provenance = Provenance::imputed;
    ++outcome.exits_imputed;
  }
  outcome.data = Dataset(data.organizations(), std::move(rounds), std::move(exits));
  return outcome;
}

}  // namespace vm
