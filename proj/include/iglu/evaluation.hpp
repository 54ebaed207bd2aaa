#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iglu/clarke.hpp"
#include "iglu/core_data.hpp"
#include "iglu/metrics.hpp"
#include "iglu/model.hpp"

namespace iglu {

/// Assignment of every record to one of k folds.
struct FoldPlan {
    int k = 10;
    std::uint64_t seed = 0;
    bool stratified = true;
    std::vector<int> assignment;  // record index -> fold

    std::vector<std::size_t> fold_indices(int fold) const;
    std::vector<std::size_t> complement_indices(int fold) const;
    std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle followed by round-robin dealing. Records are first put in
/// sample_id order, so the plan does not depend on the file's row order.
/// With stratification each cohort is shuffled and dealt in turn, keeping
/// fold sizes within one of each other.
FoldPlan kfold_split(const Dataset& ds, int k, std::uint64_t seed, bool stratified = true);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices);

struct FoldOutcome {
    int fold = 0;
    std::size_t n = 0;
    std::optional<metrics::MetricsReport> metrics;
    std::optional<std::string> error;
};

struct CrossValResult {
    FoldPlan plan;
    std::vector<FoldOutcome> folds;
    // Out-of-fold predictions pooled in record order; samples of failed folds are absent.
    std::vector<std::size_t> indices;
    std::vector<double> reference;
    std::vector<double> predicted;
    std::optional<metrics::MetricsReport> pooled;
    std::optional<std::string> pooled_error;
};

/// Trains on each fold's complement and predicts the fold. Metrics are
/// computed once over the pooled out-of-fold predictions.
CrossValResult crossval(const Dataset& ds, const ModelSpec& spec, int k, std::uint64_t seed, bool stratified = true);

struct StudyRow {
    ModelKind kind = ModelKind::mpr3;
    ChannelSet channels = ChannelSet::rm4;
    int degree = 3;
    std::optional<metrics::MetricsReport> metrics;
    std::optional<std::string> error;
};

struct StudyResult {
    std::vector<StudyRow> rows;  // degree-major, then RM1..RM4
    std::optional<std::size_t> best;  // argmin validation mARD
    std::string train_label;
    std::string validation_label;

    const StudyRow* find(ChannelSet channels, int degree) const;
    std::string to_text() const;
};

/// Fits MPR for RM1-RM4 at each degree on `train` and scores on `val`.
/// A failing cell is recorded and the remaining cells still run.
StudyResult run_channel_study(const Dataset& train, const Dataset& val, const std::vector<int>& degrees);

struct StabilityEntry {
    std::int64_t timestamp = 0;
    double reference = 0.0;
    double predicted = 0.0;
};

struct StabilityReport {
    std::vector<double> deviations;        // |pred - ref| per iteration
    std::vector<double> prediction_deltas;  // pred[i] - pred[i-1]
    std::vector<double> reference_deltas;   // ref[i] - ref[i-1]
    double mean_deviation = 0.0;
    double max_deviation = 0.0;
    double reference_drift = 0.0;  // last - first reference
    double threshold = 10.0;
    bool stable = false;  // max deviation within threshold

    std::string to_text() const;
};

StabilityReport stability_report(const std::vector<StabilityEntry>& series, double threshold = 10.0);

struct ComparisonRow {
    ModelKind kind = ModelKind::mpr3;
    std::string label;
    std::optional<metrics::MetricsReport> calibration;
    std::optional<metrics::MetricsReport> validation;
    std::optional<std::string> error;
};

struct ComparisonResult {
    std::vector<ComparisonRow> rows;  // Logistic, SVR, DNN, MPR3
    std::string calibration_text() const;
    std::string validation_text() const;
};

/// Fits Logistic, SVR, DNN and MPR3 on `train` (all on `base.channels`) and
/// scores each on the training set and on `val`.
ComparisonResult compare_models(const Dataset& train, const Dataset& val, const ModelSpec& base);

struct MetricsTableRow {
    std::string label;
    std::optional<metrics::MetricsReport> metrics;
    std::optional<std::string> error;
};

/// Fixed-width table: label, [R^2], mARD %, AvgE %, MAD mg/dl, RMSE mg/dl.
std::string format_metrics_table(const std::string& title, const std::vector<MetricsTableRow>& rows, bool with_r2);

}  // namespace iglu
