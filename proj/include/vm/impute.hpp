#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vm/ingest.hpp"

namespace vm {

// Raw regressors for one funding round. Money is in USD (not millions).
struct PmvFeatureVector {
  double T = 0.0;   // days since 1926-01-01
  double dT = 0.0;  // days since the organization's previous round, 0 for the first
  double M = 0.0;   // money raised
  double dM = 0.0;  // M minus previous round's M, 0 for the first
  int N = 0;        // investor count
  int R = 0;        // lead investor rank, 0 when unknown
  std::optional<SectorId> S;  // primary sector; empty means "other"
  std::string G;              // country code; unseen codes fall into "other"
};

// `history` holds the org's rounds dated before `round`, oldest first.
PmvFeatureVector build_features(const FundingRound& round, const std::vector<const FundingRound*>& history,
                                const Organization* org);

enum class ImputerKind { ridge, knn };

struct ImputerConfig {
  ImputerKind kind = ImputerKind::ridge;
  std::uint64_t seed = 42;
  std::vector<double> lambdas = {0.01, 0.1, 1.0, 10.0};
  int folds = 5;
  double holdout_fraction = 0.2;
  int knn_k = 10;
  std::size_t top_countries = 20;
  std::size_t min_labeled = 50;
};

// Dense design layout: 6 numeric columns, 20 sector columns (19 + other), then
// top-k countries + other. Numeric money/day columns enter as log1p (signed for dM).
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  explicit FeatureEncoder(std::vector<std::string> countries) : countries_(std::move(countries)) {}

  // Top-k most frequent country codes, ties broken by code.
  static FeatureEncoder fit(const std::vector<PmvFeatureVector>& rows, std::size_t top_k);

  std::size_t width() const;
  std::vector<double> encode(const PmvFeatureVector& x) const;
  const std::vector<std::string>& countries() const { return countries_; }

  static constexpr std::size_t kNumeric = 6;
  static constexpr std::size_t kSectorColumns = kSectorCount + 1;

 private:
  std::vector<std::string> countries_;
};

struct ImputationReport {
  double holdout_mae = 0.0;     // log space
  double holdout_median_ae = 0.0;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  double selected_lambda = 0.0;  // ridge only
  std::map<std::string, double> sector_mae;  // primary sector name (or "Other") -> holdout MAE
  std::map<std::string, std::size_t> sector_count;
};

class ImputerModel {
 public:
  ImputerKind kind = ImputerKind::ridge;
  FeatureEncoder encoder;
  std::vector<double> mean;  // standardization, training split only
  std::vector<double> sd;
  // ridge
  double lambda = 0.0;
  double intercept = 0.0;
  std::vector<double> weights;
  // knn
  int k = 10;
  std::vector<std::vector<double>> points;  // standardized
  std::vector<double> targets;              // ln pmv (USD)

  // ln PMV in USD.
  double predict_log(const PmvFeatureVector& x) const;
  std::string to_json() const;
  static ImputerModel from_json(const std::string& text);
};

struct LabeledRow {
  PmvFeatureVector x;
  double pmv_usd = 0.0;
};

struct FitResult {
  ImputerModel model;
  ImputationReport report;
};

// Throws InsufficientData below config.min_labeled rows.
FitResult fit_imputer(const std::vector<LabeledRow>& labeled, const ImputerConfig& config = {});

// Strictly positive PMV estimate in USD.
double predict_pmv(const ImputerModel& model, const PmvFeatureVector& x);

// Rounds carrying an observed PMV, across all industries.
std::vector<LabeledRow> labeled_rows(const Dataset& data);

struct ImputeOutcome {
  Dataset data;
  std::size_t rounds_imputed = 0;
  std::size_t exits_imputed = 0;
  std::size_t exits_unresolved = 0;  // pending exit with no round to build features from
};

// Fills every missing PMV; observed and already-imputed values are left untouched.
// Pending exit values are predicted from the org's last round before the exit.
ImputeOutcome impute_dataset(const Dataset& data, const ImputerModel& model);

}  // namespace vm
