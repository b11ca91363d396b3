#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermoscreen/models.hpp"
#include "thermoscreen/trialdata.hpp"

namespace thermoscreen {

struct PredictionPair {
    double truth_f = 0.0;
    double pred_f = 0.0;
};

struct KFoldResult {
    std::size_t k = 0;
    std::vector<PredictionPair> pairs;    // in the input order
    std::vector<std::size_t> fold_of;     // fold index per input example
    std::vector<double> per_fold_mae;
    double mean_fold_mae = 0.0;           // equal weight per fold
};

// Seeded Fisher-Yates shuffle, then contiguous folds whose sizes differ by at
// most one. Every example is predicted once by a model trained on the other
// folds. Throws UnderdeterminedError when a training split is too small.
KFoldResult kfold_predictions(std::span<const TrainingExample> data, ModelKind kind, std::size_t k, std::uint64_t seed);

// Fold index for each of n examples; exposed for partition tests.
std::vector<std::size_t> kfold_assignment(std::size_t n, std::size_t k, std::uint64_t seed);

struct ErrorStats {
    double mae_f = 0.0;
    double mean_err_f = 0.0;
    double sd_err_f = 0.0;  // n - 1 denominator
};

// Errors are pred - truth. Needs at least two pairs.
ErrorStats error_stats(std::span<const PredictionPair> pairs);

struct Correlation {
    double pearson_r = 0.0;
    double r_squared = 0.0;  // 1 - SS_res / SS_tot of predictions against truth
};

Correlation correlation(std::span<const PredictionPair> pairs);

inline constexpr double kDefaultLoaMultiplier = 1.96;

struct BlandAltman {
    double mean_err_f = 0.0;
    double sd_err_f = 0.0;
    double loa_low_f = 0.0;
    double loa_high_f = 0.0;
};

BlandAltman bland_altman(std::span<const PredictionPair> pairs, double multiplier = kDefaultLoaMultiplier);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold_f = 0.0;  // +inf for the all-negative sentinel
};

struct RocResult {
    std::vector<RocPoint> points;  // descending threshold, starting at (0, 0)
    double auc = 0.0;
    double best_threshold_f = 0.0;
    double best_tpr = 0.0;
    double best_fpr = 0.0;
};

// Truth is binarized at `positive_cutoff_f` (inclusive); the rule is
// "positive iff pred >= threshold". Candidate thresholds are the unique
// predictions plus +inf. The operating point maximizes Youden's J, ties going
// to the highest threshold. Throws DegenerateLabelsError for single-class input.
RocResult roc(std::span<const PredictionPair> pairs, double positive_cutoff_f = kFeverCutoffF);

struct EvaluationOptions {
    ModelKind kind = ModelKind::quadratic;
    std::size_t k = 10;
    std::uint64_t seed = 0;
    double loa_multiplier = kDefaultLoaMultiplier;
    double fever_cutoff_f = kFeverCutoffF;
};

struct EvaluationReport {
    EvaluationOptions options;
    std::size_t n = 0;
    double mae_f = 0.0;         // mean of per-fold MAE
    double pooled_mae_f = 0.0;  // MAE over all pairs
    double mean_err_f = 0.0;
    double sd_err_f = 0.0;
    double pearson_r = 0.0;
    double r_squared = 0.0;
    double loa_low_f = 0.0;
    double loa_high_f = 0.0;
    RocResult roc;
    std::vector<double> per_fold_mae;
    std::vector<PredictionPair> pairs;
};

EvaluationReport evaluate(std::span<const TrainingExample> data, const EvaluationOptions& options);

std::string report_to_json(const EvaluationReport& report, const nlohmann::json& extra = nlohmann::json::object());
std::string roc_to_csv(const RocResult& roc);
std::string predictions_to_csv(std::span<const std::string> trial_ids, std::span<const PredictionPair> pairs);

struct SweepCell {
    std::optional<double> mae_f;  // absent when no feasible k-fold run
    std::size_t n_used = 0;
    std::size_t n_dropped = 0;
};

struct SweepTable {
    std::vector<std::string> sensors;
    std::vector<double> durations_s;
    std::vector<std::vector<SweepCell>> cells;  // [sensor][duration]
};

// Rebuilds features on truncated series for every (sensor, duration) and
// reports the k-fold MAE. Trials whose window is infeasible are dropped from
// that cell only.
SweepTable duration_sweep(std::span<const TrialRecord> trials, const ProfileLibrary& profiles,
                          const EvaluationOptions& options, std::span<const std::string> sensors,
                          std::span<const double> durations_s);

// One row per sensor, one column per duration; absent cells are empty.
std::string sweep_to_csv(const SweepTable& table);
nlohmann::json sweep_to_json(const SweepTable& table);

} // namespace thermoscreen
