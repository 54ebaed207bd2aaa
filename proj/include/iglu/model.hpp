#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iglu/core_data.hpp"
#include "iglu/dnn.hpp"
#include "iglu/logistic.hpp"
#include "iglu/regression.hpp"
#include "iglu/svr.hpp"

namespace iglu {

enum class ModelKind { mpr3, mpr4, logistic, svr, dnn };

std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);
/// Row label used in comparison tables, e.g. "MPR3(RM4)".
std::string display_name(ModelKind k, ChannelSet channels);

/// Everything needed to fit one model from a dataset.
struct ModelSpec {
    ModelKind kind = ModelKind::mpr3;
    ChannelSet channels = ChannelSet::rm4;
    MprOptions mpr;
    SvrParams svr;
    LmConfig lm;
    std::vector<int> hidden_layers{10};

    int degree() const { return kind == ModelKind::mpr4 ? 4 : 3; }
};

using FittedModel = std::variant<PolynomialModel, LogisticModel, SvrModel, DnnModel>;

FittedModel fit_model(const ModelSpec& spec, const Dataset& train);
std::vector<double> predict_model(const FittedModel& model, const Dataset& ds);
double predict_model(const FittedModel& model, const SampleRecord& r);
ChannelSet model_channels(const FittedModel& model);

}  // namespace iglu
