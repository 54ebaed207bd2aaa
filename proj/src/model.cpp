#include "iglu/model.hpp"

#include <cctype>

#include "iglu/error.hpp"

namespace iglu {

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::mpr3: return "mpr3";
        case ModelKind::mpr4: return "mpr4";
        case ModelKind::logistic: return "logistic";
        case ModelKind::svr: return "svr";
        case ModelKind::dnn: return "dnn";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
    for (auto k : {ModelKind::mpr3, ModelKind::mpr4, ModelKind::logistic, ModelKind::svr, ModelKind::dnn})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::string display_name(ModelKind k, ChannelSet channels) {
    std::string rm(to_string(channels));
    for (auto& c : rm) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    switch (k) {
        case ModelKind::mpr3: return "MPR3(" + rm + ")";
        case ModelKind::mpr4: return "MPR4(" + rm + ")";
        case ModelKind::logistic: return "Logistic";
        case ModelKind::svr: return "SVR";
        case ModelKind::dnn: return "DNN";
    }
    return "?";
}

FittedModel fit_model(const ModelSpec& spec, const Dataset& train) {
    if (train.empty()) throw data_error("empty training set");
    switch (spec.kind) {
        case ModelKind::mpr3:
        case ModelKind::mpr4: return fit_mpr(train, spec.channels, spec.degree(), spec.mpr);
        case ModelKind::logistic: return fit_logistic(train, spec.channels);
        case ModelKind::svr: return fit_svr(train, spec.channels, spec.svr);
        case ModelKind::dnn: return fit_dnn(train, spec.channels, spec.hidden_layers, spec.lm).model;
    }
    throw usage_error("unknown model kind");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::vector<double> predict_model(const FittedModel& model, const Dataset& ds) {
    return std::visit(overloaded{
                          [&](const PolynomialModel& m) { return predict_mpr(m, ds); },
                          [&](const LogisticModel& m) { return predict_logistic(m, ds); },
                          [&](const SvrModel& m) { return predict_svr(m, ds); },
                          [&](const DnnModel& m) { return predict_dnn(m, ds); },
                      },
                      model);
}

double predict_model(const FittedModel& model, const SampleRecord& r) {
    Dataset one;
    one.records.push_back(r);
    return predict_model(model, one).front();
}

ChannelSet model_channels(const FittedModel& model) {
    return std::visit([](const auto& m) { return m.channels; }, model);
}

}  // namespace iglu
