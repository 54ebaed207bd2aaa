#include "iglu/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "iglu/error.hpp"

namespace iglu {

std::vector<std::size_t> FoldPlan::fold_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::complement_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        if (assignment[i] != fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int f : assignment) ++sizes[static_cast<std::size_t>(f)];
    return sizes;
}

FoldPlan kfold_split(const Dataset& ds, int k, std::uint64_t seed, bool stratified) {
    if (k < 2) throw usage_error("k-fold needs k >= 2");
    if (static_cast<std::size_t>(k) > ds.size())
        throw data_error("k = " + std::to_string(k) + " exceeds dataset size " + std::to_string(ds.size()));

    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ds.records[a].sample_id < ds.records[b].sample_id;
    });

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> dealt;
    dealt.reserve(ds.size());
    if (stratified) {
        for (auto cohort : {Cohort::healthy, Cohort::prediabetic, Cohort::diabetic}) {
            std::vector<std::size_t> group;
            for (auto i : order)
                if (ds.records[i].cohort == cohort) group.push_back(i);
            std::shuffle(group.begin(), group.end(), rng);
            dealt.insert(dealt.end(), group.begin(), group.end());
        }
    } else {
        dealt = order;
        std::shuffle(dealt.begin(), dealt.end(), rng);
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.stratified = stratified;
    plan.assignment.assign(ds.size(), -1);
    for (std::size_t pos = 0; pos < dealt.size(); ++pos)
        plan.assignment[dealt[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return plan;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.provenance = ds.provenance;
    out.records.reserve(indices.size());
    for (auto i : indices) out.records.push_back(ds.records.at(i));
    return out;
}

CrossValResult crossval(const Dataset& ds, const ModelSpec& spec, int k, std::uint64_t seed, bool stratified) {
    CrossValResult res;
    res.plan = kfold_split(ds, k, seed, stratified);
    std::vector<std::optional<double>> oof(ds.size());

    for (int f = 0; f < k; ++f) {
        FoldOutcome out;
        out.fold = f;
        const auto test_idx = res.plan.fold_indices(f);
        out.n = test_idx.size();
        try {
            const Dataset train = subset(ds, res.plan.complement_indices(f));
            const Dataset test = subset(ds, test_idx);
            const FittedModel model = fit_model(spec, train);
            const auto pred = predict_model(model, test);
            for (std::size_t j = 0; j < test_idx.size(); ++j) oof[test_idx[j]] = pred[j];
            try {
                out.metrics = metrics::full_report(test.references(), pred);
            } catch (const Error& e) {
                out.error = e.what();
            }
        } catch (const Error& e) {
            out.error = e.what();
        }
        res.folds.push_back(std::move(out));
    }

    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!oof[i]) continue;
        res.indices.push_back(i);
        res.reference.push_back(ds.records[i].ref_glucose);
        res.predicted.push_back(*oof[i]);
    }
    if (res.reference.empty()) {
        res.pooled_error = "every fold failed";
    } else {
        try {
            res.pooled = metrics::full_report(res.reference, res.predicted);
        } catch (const Error& e) {
            res.pooled_error = e.what();
        }
    }
    return res;
}

const StudyRow* StudyResult::find(ChannelSet channels, int degree) const {
    for (const auto& r : rows)
        if (r.channels == channels && r.degree == degree) return &r;
    return nullptr;
}

StudyResult run_channel_study(const Dataset& train, const Dataset& val, const std::vector<int>& degrees) {
    if (train.empty() || val.empty()) throw data_error("channel study needs non-empty train and validation sets");
    StudyResult res;
    const auto ref = val.references();
    for (int degree : degrees) {
        for (auto channels : kAllChannelSets) {
            StudyRow row;
            row.kind = degree == 4 ? ModelKind::mpr4 : ModelKind::mpr3;
            row.channels = channels;
            row.degree = degree;
            try {
                const auto model = fit_mpr(train, channels, degree);
                row.metrics = metrics::full_report(ref, predict_mpr(model, val));
            } catch (const Error& e) {
                row.error = e.what();
            }
            res.rows.push_back(std::move(row));
        }
    }
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        if (!res.rows[i].metrics) continue;
        if (!res.best || res.rows[i].metrics->mard < res.rows[*res.best].metrics->mard) res.best = i;
    }
    return res;
}

std::string StudyResult::to_text() const {
    std::ostringstream os;
    std::vector<int> degrees;
    for (const auto& r : rows)
        if (std::find(degrees.begin(), degrees.end(), r.degree) == degrees.end()) degrees.push_back(r.degree);
    for (int d : degrees) {
        std::vector<MetricsTableRow> table;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].degree != d) continue;
            std::string label(to_string(rows[i].channels));
            for (auto& c : label) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (best && *best == i) label += " *";
            table.push_back({label, rows[i].metrics, rows[i].error});
        }
        os << format_metrics_table("MPR channel study, polynomial degree " + std::to_string(d), table, true) << '\n';
    }
    if (!train_label.empty() || !validation_label.empty())
        os << "train: " << train_label << "  validation: " << validation_label << '\n';
    os << "* lowest validation mARD\n";
    return os.str();
}

StabilityReport stability_report(const std::vector<StabilityEntry>& series, double threshold) {
    if (series.size() < 2) throw data_error("stability report needs at least 2 entries");
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].timestamp <= series[i - 1].timestamp)
            throw data_error("timestamps must be strictly increasing (entry " + std::to_string(i) + ")");

    StabilityReport r;
    r.threshold = threshold;
    double sum = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double dev = std::abs(series[i].predicted - series[i].reference);
        r.deviations.push_back(dev);
        sum += dev;
        r.max_deviation = std::max(r.max_deviation, dev);
        if (i > 0) {
            r.prediction_deltas.push_back(series[i].predicted - series[i - 1].predicted);
            r.reference_deltas.push_back(series[i].reference - series[i - 1].reference);
        }
    }
    r.mean_deviation = sum / static_cast<double>(series.size());
    r.reference_drift = series.back().reference - series.front().reference;
    r.stable = r.max_deviation <= threshold;
    return r;
}

std::string StabilityReport::to_text() const {
    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof line, "%-9s %12s %14s %14s\n", "iteration", "|pred-ref|", "pred delta", "ref delta");
    os << line;
    for (std::size_t i = 0; i < deviations.size(); ++i) {
        if (i == 0)
            std::snprintf(line, sizeof line, "%-9zu %12.2f %14s %14s\n", i + 1, deviations[i], "-", "-");
        else
            std::snprintf(line, sizeof line, "%-9zu %12.2f %14.2f %14.2f\n", i + 1, deviations[i],
                          prediction_deltas[i - 1], reference_deltas[i - 1]);
        os << line;
    }
    std::snprintf(line, sizeof line, "mean deviation %.2f mg/dl, max %.2f mg/dl, reference drift %.2f mg/dl\n",
                  mean_deviation, max_deviation, reference_drift);
    os << line;
    std::snprintf(line, sizeof line, "%s (threshold %.1f mg/dl)\n", stable ? "stable" : "unstable", threshold);
    os << line;
    return os.str();
}

ComparisonResult compare_models(const Dataset& train, const Dataset& val, const ModelSpec& base) {
    ComparisonResult res;
    for (auto kind : {ModelKind::logistic, ModelKind::svr, ModelKind::dnn, ModelKind::mpr3}) {
        ComparisonRow row;
        row.kind = kind;
        row.label = display_name(kind, base.channels);
        ModelSpec spec = base;
        spec.kind = kind;
        try {
            const auto model = fit_model(spec, train);
            row.calibration = metrics::full_report(train.references(), predict_model(model, train));
            row.validation = metrics::full_report(val.references(), predict_model(model, val));
        } catch (const Error& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

std::string ComparisonResult::calibration_text() const {
    std::vector<MetricsTableRow> t;
    for (const auto& r : rows) t.push_back({r.label, r.calibration, r.error});
    return format_metrics_table("Calibration (training set)", t, false);
}

std::string ComparisonResult::validation_text() const {
    std::vector<MetricsTableRow> t;
    for (const auto& r : rows) t.push_back({r.label, r.validation, r.error});
    return format_metrics_table("Validation", t, false);
}

std::string format_metrics_table(const std::string& title, const std::vector<MetricsTableRow>& rows, bool with_r2) {
    std::ostringstream os;
    char line[200];
    os << title << '\n';
    if (with_r2) {
        std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %9s %9s\n", "", "R^2", "mARD", "AvgE", "MAD", "RMSE");
        os << line;
        std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %9s %9s\n", "", "value", "(%)", "(%)", "(mg/dl)",
                      "(mg/dl)");
    } else {
        std::snprintf(line, sizeof line, "%-12s %8s %8s %9s %9s\n", "Model", "mARD", "AvgE", "MAD", "RMSE");
        os << line;
        std::snprintf(line, sizeof line, "%-12s %8s %8s %9s %9s\n", "", "%", "%", "mg/dl", "mg/dl");
    }
    os << line;
    const std::size_t width = with_r2 ? 58 : 49;
    os << std::string(width, '-') << '\n';
    for (const auto& r : rows) {
        if (!r.metrics) {
            std::snprintf(line, sizeof line, "%-12s failed: %s\n", r.label.c_str(),
                          r.error ? r.error->c_str() : "no metrics");
        } else if (with_r2) {
            char r2[16] = "-";
            if (r.metrics->r_squared) std::snprintf(r2, sizeof r2, "%.2f", *r.metrics->r_squared);
            std::snprintf(line, sizeof line, "%-12s %8s %8.2f %8.2f %9.2f %9.2f\n", r.label.c_str(), r2,
                          r.metrics->mard, r.metrics->avge, r.metrics->mad, r.metrics->rmse);
        } else {
            std::snprintf(line, sizeof line, "%-12s %8.2f %8.2f %9.2f %9.2f\n", r.label.c_str(), r.metrics->mard,
                          r.metrics->avge, r.metrics->mad, r.metrics->rmse);
        }
        os << line;
    }
    return os.str();
}

}  // namespace iglu
