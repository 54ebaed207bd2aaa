#include "iglu/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iglu/error.hpp"

namespace iglu::io {

namespace {

void dump_into(const Json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                out += Json(it.key()).dump();
                out += ": ";
                dump_into(it.value(), out, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
            out += flat ? "[" : "[\n";
            bool first = true;
            for (const auto& e : j) {
                if (!first) out += flat ? ", " : ",\n";
                first = false;
                if (!flat) out += pad;
                dump_into(e, out, depth + 1);
            }
            out += flat ? "]" : "\n" + close_pad + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            // Keep the value a float on re-read.
            if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
            return;
        }
        default: out += j.dump(); return;
    }
}

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw data_error(std::string("model file missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw data_error(std::string("model file field '") + key + "' has the wrong type");
    }
}

Json standardization_json(const Standardization& s) {
    Json j;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    return j;
}

Standardization standardization_from(const Json& j) {
    Standardization s;
    s.mean = field<std::vector<double>>(j, "mean");
    s.stddev = field<std::vector<double>>(j, "stddev");
    if (s.mean.size() != s.stddev.size()) throw data_error("standardization mean/stddev length mismatch");
    for (double sd : s.stddev)
        if (!(sd > 0.0)) throw data_error("standardization stddev must be positive");
    return s;
}

ChannelSet channels_from(const Json& j) {
    const auto s = field<std::string>(j, "channels");
    auto c = parse_channel_set(s);
    if (!c) throw data_error("unknown channel set '" + s + "'");
    return *c;
}

Json optional_metrics(const std::optional<metrics::MetricsReport>& m) { return m ? to_json(*m) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string dump(const Json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += '\n';
    return out;
}

Json to_json(const metrics::MetricsReport& r) {
    Json j;
    j["n"] = r.n;
    j["mad"] = r.mad;
    j["mard"] = r.mard;
    j["rmse"] = r.rmse;
    j["avge"] = r.avge;
    j["pearson_r"] = optional_number(r.pearson_r);
    j["r_squared"] = optional_number(r.r_squared);
    return j;
}

metrics::MetricsReport metrics_from_json(const Json& j) {
    metrics::MetricsReport r;
    r.n = field<std::size_t>(j, "n");
    r.mad = field<double>(j, "mad");
    r.mard = field<double>(j, "mard");
    r.rmse = field<double>(j, "rmse");
    r.avge = field<double>(j, "avge");
    if (j.contains("pearson_r") && !j["pearson_r"].is_null()) r.pearson_r = field<double>(j, "pearson_r");
    if (j.contains("r_squared") && !j["r_squared"].is_null()) r.r_squared = field<double>(j, "r_squared");
    return r;
}

Json to_json(const PolynomialModel& m) {
    Json j;
    j["kind"] = m.basis.degree == 4 ? "mpr4" : "mpr3";
    j["channels"] = std::string(to_string(m.channels));
    j["degree"] = m.basis.degree;
    Json exps = Json::array();
    for (const auto& e : m.basis.monomials) {
        Json t = Json::array();
        for (int i = 0; i < m.basis.n_vars; ++i) t.push_back(e[static_cast<std::size_t>(i)]);
        exps.push_back(t);
    }
    j["monomial_exponents"] = exps;
    j["coefficients"] = m.coefficients;
    j["intercept"] = m.intercept;
    j["standardization"] = standardization_json(m.standardization);
    j["created_utc"] = m.created_utc;
    j["training_metrics"] = optional_metrics(m.training_metrics);
    return j;
}

Json to_json(const LogisticModel& m, const std::optional<metrics::MetricsReport>& training) {
    Json j;
    j["kind"] = "logistic";
    j["channels"] = std::string(to_string(m.channels));
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["y_min"] = m.y_min;
    j["y_max"] = m.y_max;
    j["standardization"] = standardization_json(m.standardization);
    j["iterations"] = m.iterations;
    j["converged"] = m.converged;
    j["training_metrics"] = optional_metrics(training);
    return j;
}

Json to_json(const SvrModel& m, const std::optional<metrics::MetricsReport>& training) {
    Json j;
    j["kind"] = "svr";
    j["channels"] = std::string(to_string(m.channels));
    j["C"] = m.C;
    j["epsilon"] = m.epsilon;
    j["gamma"] = m.gamma;
    j["bias"] = m.bias;
    j["support_vectors"] = m.support_vectors;
    j["dual_coef"] = m.dual_coef;
    j["standardization"] = standardization_json(m.standardization);
    j["iterations"] = m.iterations;
    j["kkt_violation"] = m.kkt_violation;
    j["converged"] = m.converged;
    j["training_metrics"] = optional_metrics(training);
    return j;
}

Json to_json(const DnnModel& m, const std::optional<metrics::MetricsReport>& training) {
    Json j;
    j["kind"] = "dnn";
    j["channels"] = std::string(to_string(m.channels));
    j["layer_sizes"] = m.layer_sizes;
    Json weights = Json::array();
    Json biases = Json::array();
    for (const auto& layer : m.layers) {
        Json w = Json::array();
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
            w.push_back(row);
        }
        weights.push_back(w);
        biases.push_back(std::vector<double>(layer.biases.data(), layer.biases.data() + layer.biases.size()));
    }
    j["weights"] = weights;
    j["biases"] = biases;
    Json s;
    s["input"] = standardization_json(m.input_standardization);
    s["target"] = Json{{"mean", m.target_mean}, {"stddev", m.target_stddev}};
    j["standardization"] = s;
    j["seed"] = m.seed;
    j["training_metrics"] = optional_metrics(training);
    return j;
}

Json model_to_json(const FittedModel& m, const std::optional<metrics::MetricsReport>& training) {
    return std::visit(
        [&](const auto& model) -> Json {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, PolynomialModel>) {
                Json j = to_json(model);
                if (training) j["training_metrics"] = to_json(*training);
                return j;
            } else {
                return to_json(model, training);
            }
        },
        m);
}

FittedModel model_from_json(const Json& j) {
    if (!j.is_object()) throw data_error("model file is not a JSON object");
    const auto kind_name = field<std::string>(j, "kind");
    const auto kind = parse_model_kind(kind_name);
    if (!kind) throw data_error("unknown model kind '" + kind_name + "'");

    switch (*kind) {
        case ModelKind::mpr3:
        case ModelKind::mpr4: {
            PolynomialModel m;
            m.channels = channels_from(j);
            const int n_vars = static_cast<int>(channel_indices(m.channels).size());
            m.basis = build_basis(n_vars, field<int>(j, "degree"), true);
            const auto exps = field<std::vector<std::vector<int>>>(j, "monomial_exponents");
            if (exps.size() != m.basis.monomials.size()) throw data_error("monomial count does not match degree");
            for (std::size_t k = 0; k < exps.size(); ++k) {
                Exponents e{0, 0, 0};
                if (exps[k].size() != static_cast<std::size_t>(n_vars)) throw data_error("bad exponent tuple");
                for (std::size_t i = 0; i < exps[k].size(); ++i) e[i] = exps[k][i];
                if (e != m.basis.monomials[k]) throw data_error("monomial order differs from the canonical basis");
            }
            m.coefficients = field<std::vector<double>>(j, "coefficients");
            if (m.coefficients.size() != m.basis.monomials.size())
                throw data_error("coefficient count does not match basis");
            m.intercept = field<double>(j, "intercept");
            m.standardization = standardization_from(j.at("standardization"));
            if (m.standardization.mean.size() != static_cast<std::size_t>(n_vars))
                throw data_error("standardization arity does not match channels");
            m.created_utc = field<std::int64_t>(j, "created_utc");
            if (j.contains("training_metrics") && !j["training_metrics"].is_null())
                m.training_metrics = metrics_from_json(j["training_metrics"]);
            return m;
        }
        case ModelKind::logistic: {
            LogisticModel m;
            m.channels = channels_from(j);
            m.weights = field<std::vector<double>>(j, "weights");
            m.bias = field<double>(j, "bias");
            m.y_min = field<double>(j, "y_min");
            m.y_max = field<double>(j, "y_max");
            if (!(m.y_max > m.y_min)) throw data_error("logistic y_max must exceed y_min");
            m.standardization = standardization_from(j.at("standardization"));
            if (m.weights.size() != m.standardization.mean.size()) throw data_error("logistic weight count mismatch");
            m.iterations = field<int>(j, "iterations");
            m.converged = field<bool>(j, "converged");
            return m;
        }
        case ModelKind::svr: {
            SvrModel m;
            m.channels = channels_from(j);
            m.C = field<double>(j, "C");
            m.epsilon = field<double>(j, "epsilon");
            m.gamma = field<double>(j, "gamma");
            m.bias = field<double>(j, "bias");
            m.support_vectors = field<std::vector<std::vector<double>>>(j, "support_vectors");
            m.dual_coef = field<std::vector<double>>(j, "dual_coef");
            m.standardization = standardization_from(j.at("standardization"));
            if (m.support_vectors.size() != m.dual_coef.size()) throw data_error("SVR support vector count mismatch");
            for (double a : m.dual_coef)
                if (std::abs(a) > m.C * (1.0 + 1e-12)) throw data_error("SVR dual coefficient exceeds C");
            m.iterations = field<long>(j, "iterations");
            m.kkt_violation = field<double>(j, "kkt_violation");
            m.converged = field<bool>(j, "converged");
            return m;
        }
        case ModelKind::dnn: {
            DnnModel m;
            m.channels = channels_from(j);
            m.layer_sizes = field<std::vector<int>>(j, "layer_sizes");
            const auto weights = field<std::vector<std::vector<std::vector<double>>>>(j, "weights");
            const auto biases = field<std::vector<std::vector<double>>>(j, "biases");
            if (m.layer_sizes.size() < 2 || weights.size() + 1 != m.layer_sizes.size() ||
                biases.size() != weights.size())
                throw data_error("DNN layer shapes do not chain");
            for (std::size_t l = 0; l < weights.size(); ++l) {
                const auto out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
                const auto in = static_cast<std::size_t>(m.layer_sizes[l]);
                if (weights[l].size() != out || biases[l].size() != out) throw data_error("DNN layer shape mismatch");
                DnnLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
                               Eigen::VectorXd(static_cast<Eigen::Index>(out))};
                for (std::size_t r = 0; r < out; ++r) {
                    if (weights[l][r].size() != in) throw data_error("DNN weight row length mismatch");
                    for (std::size_t c = 0; c < in; ++c)
                        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = weights[l][r][c];
                    layer.biases(static_cast<Eigen::Index>(r)) = biases[l][r];
                }
                m.layers.push_back(std::move(layer));
            }
            const auto& s = j.at("standardization");
            m.input_standardization = standardization_from(s.at("input"));
            m.target_mean = field<double>(s.at("target"), "mean");
            m.target_stddev = field<double>(s.at("target"), "stddev");
            m.seed = field<std::uint64_t>(j, "seed");
            return m;
        }
    }
    throw data_error("unknown model kind");
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + path.string());
    out << body;
    if (!out) throw io_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void save_model(const FittedModel& m, const std::optional<metrics::MetricsReport>& training,
                const std::filesystem::path& path) {
    write_text(path, dump(model_to_json(m, training)));
}

FittedModel load_model(const std::filesystem::path& path) {
    const auto text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file is not valid JSON: " + std::string(e.what()));
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("malformed model file: " + std::string(e.what()));
    }
}

Json to_json(const clarke::CegReport& r) {
    Json j;
    j["n"] = r.points.size();
    Json counts;
    for (int z = 0; z < 5; ++z) counts[std::string(1, static_cast<char>('A' + z))] = r.counts[static_cast<std::size_t>(z)];
    j["counts"] = counts;
    j["percent_ab"] = r.percent_ab;
    Json pts = Json::array();
    for (const auto& p : r.points)
        pts.push_back(Json{{"ref", p.ref}, {"pred", p.pred}, {"zone", std::string(1, clarke::to_char(p.zone))}});
    j["points"] = pts;
    return j;
}

Json to_json(const CrossValResult& r) {
    Json j;
    j["k"] = r.plan.k;
    j["seed"] = r.plan.seed;
    j["stratified"] = r.plan.stratified;
    j["aggregation"] = "pooled out-of-fold predictions";
    j["pooled"] = optional_metrics(r.pooled);
    if (r.pooled_error) j["pooled_error"] = *r.pooled_error;
    Json folds = Json::array();
    for (const auto& f : r.folds) {
        Json fj;
        fj["fold"] = f.fold;
        fj["n"] = f.n;
        fj["metrics"] = optional_metrics(f.metrics);
        if (f.error) fj["error"] = *f.error;
        folds.push_back(fj);
    }
    j["folds"] = folds;
    j["predictions"] = r.predicted.size();
    return j;
}

Json to_json(const StudyResult& r) {
    Json j;
    j["train"] = r.train_label;
    j["validation"] = r.validation_label;
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        Json rj;
        rj["model"] = std::string(to_string(row.kind));
        rj["channels"] = std::string(to_string(row.channels));
        rj["degree"] = row.degree;
        rj["metrics"] = optional_metrics(row.metrics);
        if (row.error) rj["error"] = *row.error;
        rj["best"] = r.best && *r.best == i;
        rows.push_back(rj);
    }
    j["rows"] = rows;
    return j;
}

Json to_json(const StabilityReport& r) {
    Json j;
    j["iterations"] = r.deviations.size();
    j["deviations"] = r.deviations;
    j["prediction_deltas"] = r.prediction_deltas;
    j["reference_deltas"] = r.reference_deltas;
    j["mean_deviation"] = r.mean_deviation;
    j["max_deviation"] = r.max_deviation;
    j["reference_drift"] = r.reference_drift;
    j["threshold"] = r.threshold;
    j["stable"] = r.stable;
    return j;
}

Json to_json(const ComparisonResult& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json rj;
        rj["model"] = row.label;
        rj["calibration"] = optional_metrics(row.calibration);
        rj["validation"] = optional_metrics(row.validation);
        if (row.error) rj["error"] = *row.error;
        rows.push_back(rj);
    }
    return Json{{"rows", rows}};
}

}  // namespace iglu::io
