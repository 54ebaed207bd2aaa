#include "iglu/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "iglu/clarke.hpp"
#include "iglu/core_data.hpp"
#include "iglu/evaluation.hpp"
#include "iglu/model.hpp"
#include "iglu/model_io.hpp"
#include "iglu/telemetry.hpp"

namespace iglu::cli {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return kExitUsage;
        case ErrorKind::data: return kExitData;
        case ErrorKind::numeric: return kExitNumeric;
        case ErrorKind::io: return kExitIo;
    }
    return 1;
}

namespace {

std::string_view kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::data: return "data";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    const std::string t = v;
    if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double d = std::stod(t, &used);
        if (used == t.size()) return d;
    } catch (const std::exception&) {
    }
    throw usage_error("config [" + section + "] " + key + ": not a number: '" + v + "'");
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const int i = std::stoi(v, &used);
        if (used == v.size()) return i;
    } catch (const std::exception&) {
    }
    throw usage_error("config [" + section + "] " + key + ": not an integer: '" + v + "'");
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw usage_error(std::string("config: ") + e.what());
    }
    static const std::map<std::string, std::vector<std::string>> known{
        {"acquisition",
         {"adc_bits", "full_scale", "sample_rate", "averaging_count", "snr_db", "noise_power", "tissue_variation"}},
        {"lm", {"lambda_init", "lambda_up", "lambda_down", "max_iters", "grad_tol", "lambda_max"}},
        {"svr", {"C", "epsilon", "gamma", "kkt_tolerance", "max_iters"}},
    };
    ConfigFile cfg;
    for (const auto& [section, body] : tree) {
        const auto k = known.find(section);
        if (k == known.end() || body.empty())
            throw usage_error("config: unknown section or top-level key '" + section + "'");
        for (const auto& [key, value] : body) {
            if (std::find(k->second.begin(), k->second.end(), key) == k->second.end())
                throw usage_error("config: unknown key '" + key + "' in [" + section + "]");
            cfg.sections[section][key] = value.data();
        }
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) { return parse(io::read_text(path)); }

void ConfigFile::apply(AcquisitionConfig& cfg) const {
    const auto it = sections.find("acquisition");
    if (it == sections.end()) return;
    for (const auto& [key, v] : it->second) {
        if (key == "adc_bits") cfg.adc_bits = to_int("acquisition", key, v);
        else if (key == "full_scale") cfg.full_scale = to_double("acquisition", key, v);
        else if (key == "sample_rate") cfg.sample_rate = to_double("acquisition", key, v);
        else if (key == "averaging_count") cfg.averaging_count = to_int("acquisition", key, v);
        else if (key == "snr_db") cfg.snr_db = to_double("acquisition", key, v);
        else if (key == "noise_power") cfg.noise_power = to_double("acquisition", key, v);
        else if (key == "tissue_variation") cfg.tissue_variation = to_double("acquisition", key, v);
    }
}

void ConfigFile::apply(LmConfig& cfg) const {
    const auto it = sections.find("lm");
    if (it == sections.end()) return;
    for (const auto& [key, v] : it->second) {
        if (key == "lambda_init") cfg.lambda_init = to_double("lm", key, v);
        else if (key == "lambda_up") cfg.lambda_up = to_double("lm", key, v);
        else if (key == "lambda_down") cfg.lambda_down = to_double("lm", key, v);
        else if (key == "max_iters") cfg.max_iters = to_int("lm", key, v);
        else if (key == "grad_tol") cfg.grad_tol = to_double("lm", key, v);
        else if (key == "lambda_max") cfg.lambda_max = to_double("lm", key, v);
    }
}

void ConfigFile::apply(SvrParams& params) const {
    const auto it = sections.find("svr");
    if (it == sections.end()) return;
    for (const auto& [key, v] : it->second) {
        if (key == "C") params.C = to_double("svr", key, v);
        else if (key == "epsilon") params.epsilon = to_double("svr", key, v);
        else if (key == "gamma") params.gamma = to_double("svr", key, v);
        else if (key == "kkt_tolerance") params.kkt_tolerance = to_double("svr", key, v);
        else if (key == "max_iters") params.max_iters = to_int("svr", key, v);
    }
}

namespace {

struct Options {
    std::size_t n = 0;
    std::uint64_t seed = 42;
    std::string out;
    std::string model;
    std::string channels = "rm4";
    std::optional<int> degree;
    std::string train;
    std::string data;
    std::string report;
    std::string ceg_svg;
    int folds = 10;
    std::string layers = "10";
    std::string addr = "127.0.0.1:8080";
    std::string store;
    std::string config;
};

class Runner {
public:
    Runner(const Options& o, std::ostream& out, std::ostream& log) : o_(o), out_(out), log_(log) {
        if (!o_.config.empty()) config_ = ConfigFile::load(o_.config);
    }

    void simulate() {
        AcquisitionConfig cfg;
        config_.apply(cfg);
        cfg.seed = o_.seed;
        Simulator sim(cfg);
        const Dataset ds = sim.generate_dataset(o_.n, CohortMix::calibration_default());
        save_dataset(ds, o_.out);
        stage("simulate", "wrote " + std::to_string(ds.size()) + " synthetic records to " + o_.out);
        out_ << cohort_summary(ds).to_text();
    }

    void calibrate() {
        const ModelSpec spec = model_spec();
        const Dataset train = load(o_.train);
        stage("calibrate", "fitting " + std::string(to_string(spec.kind)) + " on " + std::to_string(train.size()) +
                               " records");
        const FittedModel model = fit_model(spec, train);
        const auto training = metrics::full_report(train.references(), predict_model(model, train));
        io::save_model(model, training, o_.out);
        if (!o_.report.empty()) io::write_text(o_.report, io::dump(io::to_json(training)));
        out_ << format_metrics_table("Calibration (training set)",
                                     {{display_name(spec.kind, spec.channels), training, std::nullopt}}, true);
        stage("calibrate", "model written to " + o_.out);
    }

    void evaluate() {
        const FittedModel model = io::load_model(o_.model);
        const Dataset data = load(o_.data);
        const auto ref = data.references();
        const auto pred = predict_model(model, data);
        const auto report = metrics::full_report(ref, pred);
        const auto ceg = clarke::ceg_report(ref, pred);

        io::Json j;
        j["model"] = o_.model;
        j["data"] = o_.data;
        j["evaluation"] = "frozen model";
        j["metrics"] = io::to_json(report);
        io::Json cj = io::to_json(ceg);
        cj.erase("points");
        j["ceg"] = cj;
        io::write_text(o_.report, io::dump(j));
        if (!o_.ceg_svg.empty()) clarke::ceg_svg(ceg, o_.ceg_svg);
        if (!o_.out.empty()) clarke::ceg_csv(ceg, o_.out);

        const ChannelSet channels = model_channels(model);
        const std::string label = std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PolynomialModel>)
                    return display_name(m.basis.degree == 4 ? ModelKind::mpr4 : ModelKind::mpr3, channels);
                else if constexpr (std::is_same_v<T, LogisticModel>)
                    return display_name(ModelKind::logistic, channels);
                else if constexpr (std::is_same_v<T, SvrModel>)
                    return display_name(ModelKind::svr, channels);
                else
                    return display_name(ModelKind::dnn, channels);
            },
            model);
        out_ << format_metrics_table("Evaluation on " + o_.data, {{label, report, std::nullopt}}, true);
        out_ << ceg.to_text();
        stage("evaluate", "report written to " + o_.report);
    }

    void crossval() {
        const ModelSpec spec = model_spec();
        const Dataset ds = load(o_.data);
        stage("crossval", std::to_string(o_.folds) + "-fold cross-validation of " + std::string(to_string(spec.kind)));
        const auto res = iglu::crossval(ds, spec, o_.folds, o_.seed);
        if (!res.pooled) throw numeric_error("cross-validation failed: " + res.pooled_error.value_or("unknown"));
        io::Json j = io::to_json(res);
        const auto ceg = clarke::ceg_report(res.reference, res.predicted);
        io::Json cj = io::to_json(ceg);
        cj.erase("points");
        j["ceg"] = cj;
        io::write_text(o_.report, io::dump(j));
        if (!o_.ceg_svg.empty()) clarke::ceg_svg(ceg, o_.ceg_svg);
        if (!o_.out.empty()) clarke::ceg_csv(ceg, o_.out);

        std::vector<MetricsTableRow> rows;
        for (const auto& f : res.folds) rows.push_back({"fold " + std::to_string(f.fold + 1), f.metrics, f.error});
        rows.push_back({"pooled", res.pooled, res.pooled_error});
        out_ << format_metrics_table("Cross-validation (" + display_name(spec.kind, spec.channels) + ")", rows, true);
        out_ << ceg.to_text();
        for (const auto& f : res.folds)
            if (f.error) log_ << "[crossval] fold " << f.fold + 1 << " failed: " << *f.error << '\n';
    }

    void study() {
        Dataset train = load(o_.train);
        Dataset val = load(o_.data);
        std::vector<int> degrees{3, 4};
        if (o_.degree) degrees = {*o_.degree};
        stage("study", "channel study on " + std::to_string(train.size()) + " / " + std::to_string(val.size()) +
                           " records");
        StudyResult study = run_channel_study(train, val, degrees);
        study.train_label = o_.train;
        study.validation_label = o_.data;

        ModelSpec base = model_spec_base();
        stage("study", "comparing Logistic, SVR, DNN and MPR3 on " + std::string(to_string(base.channels)));
        const ComparisonResult cmp = compare_models(train, val, base);

        io::Json j;
        j["channel_study"] = io::to_json(study);
        j["comparison"] = io::to_json(cmp);
        j["comparison_channels"] = std::string(to_string(base.channels));
        io::write_text(o_.report, io::dump(j));

        std::ostringstream text;
        text << study.to_text() << '\n' << cmp.calibration_text() << '\n' << cmp.validation_text();
        if (!o_.out.empty()) io::write_text(o_.out, text.str());
        out_ << text.str();
    }

    void stability() {
        const FittedModel model = io::load_model(o_.model);
        const Dataset data = load(o_.data);
        std::vector<StabilityEntry> series;
        const auto pred = predict_model(model, data);
        for (std::size_t i = 0; i < data.size(); ++i)
            series.push_back({data.records[i].timestamp, data.records[i].ref_glucose, pred[i]});
        const auto rep = stability_report(series);
        io::write_text(o_.report, io::dump(io::to_json(rep)));
        out_ << rep.to_text();
    }

    void ceg() {
        std::vector<double> ref, pred;
        read_pairs(o_.data, ref, pred);
        const auto rep = clarke::ceg_report(ref, pred);
        clarke::ceg_svg(rep, o_.ceg_svg);
        if (!o_.report.empty()) io::write_text(o_.report, io::dump(io::to_json(rep)));
        if (!o_.out.empty()) clarke::ceg_csv(rep, o_.out);
        out_ << rep.to_text();
    }

    void serve() {
        const auto [host, port] = telemetry::parse_bind_address(o_.addr);

        // Route SIGINT/SIGTERM to this thread; server threads inherit the mask.
        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);

        telemetry::Service service(o_.store);
        const int bound = service.bind(host, port);
        stage("serve", "listening on " + host + ":" + std::to_string(bound) + ", store " + o_.store + " (" +
                           std::to_string(service.store().size()) + " records)");
        std::thread worker([&] { service.run(); });
        int sig = 0;
        sigwait(&set, &sig);
        stage("serve", "shutting down");
        service.stop();
        worker.join();
    }

private:
    void stage(const std::string& name, const std::string& msg) { log_ << "[" << name << "] " << msg << '\n'; }

    Dataset load(const std::string& path) {
        auto loaded = load_dataset(path, true);
        return std::move(loaded.dataset);
    }

    ModelSpec model_spec_base() const {
        ModelSpec spec;
        const auto ch = parse_channel_set(o_.channels);
        if (!ch) throw usage_error("--channels must be one of rm1, rm2, rm3, rm4");
        spec.channels = *ch;
        config_.apply(spec.svr);
        config_.apply(spec.lm);
        spec.lm.seed = o_.seed;
        spec.hidden_layers = parse_layers(o_.layers);
        return spec;
    }

    ModelSpec model_spec() const {
        ModelSpec spec = model_spec_base();
        const auto kind = parse_model_kind(o_.model);
        if (!kind) throw usage_error("--model must be one of mpr3, mpr4, logistic, svr, dnn");
        spec.kind = *kind;
        if (o_.degree) {
            const bool mpr = spec.kind == ModelKind::mpr3 || spec.kind == ModelKind::mpr4;
            if (!mpr || *o_.degree != spec.degree())
                throw usage_error("--degree " + std::to_string(*o_.degree) + " conflicts with --model " + o_.model);
        }
        return spec;
    }

    static std::vector<int> parse_layers(const std::string& text) {
        auto bad = [&] { return usage_error("--layers expects sizes like '10', '10,10' or '10x10', got '" + text + "'"); };
        std::vector<int> out;
        auto num = [&](const std::string& s) {
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(s, &used);
            } catch (const std::exception&) {
                throw bad();
            }
            if (used != s.size() || v < 1) throw bad();
            return v;
        };
        const auto x = text.find('x');
        if (x != std::string::npos) {
            const int width = num(text.substr(0, x));
            const int depth = num(text.substr(x + 1));
            out.assign(static_cast<std::size_t>(depth), width);
            return out;
        }
        std::stringstream ss(text);
        std::string part;
        while (std::getline(ss, part, ',')) out.push_back(num(part));
        if (out.empty()) throw bad();
        return out;
    }

    static void read_pairs(const std::string& path, std::vector<double>& ref, std::vector<double>& pred) {
        std::istringstream in(io::read_text(path));
        std::string line;
        if (!std::getline(in, line) || line.rfind("ref,pred", 0) != 0)
            throw data_error(path + ": expected header starting with 'ref,pred'");
        std::size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string a, b;
            std::getline(ss, a, ',');
            std::getline(ss, b, ',');
            try {
                std::size_t ua = 0, ub = 0;
                const double r = std::stod(a, &ua);
                const double p = std::stod(b, &ub);
                if (ua != a.size() || ub != b.size()) throw std::invalid_argument("trailing");
                ref.push_back(r);
                pred.push_back(p);
            } catch (const std::exception&) {
                throw data_error(path + ": line " + std::to_string(line_no) + ": malformed pair");
            }
        }
    }

    const Options& o_;
    std::ostream& out_;
    std::ostream& log_;
    ConfigFile config_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibration and evaluation toolkit for a three-channel NIR glucometer", "iglu"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sample CSV");
    simulate->add_option("--n", o.n, "Number of records")->required()->check(CLI::PositiveNumber);
    simulate->add_option("--seed", o.seed, "Random seed");
    simulate->add_option("--out", o.out, "Output CSV")->required();
    simulate->add_option("--config", o.config, "INI config ([acquisition])");

    auto* calibrate = app.add_subcommand("calibrate", "Fit a calibration model");
    calibrate->add_option("--model", o.model, "mpr3, mpr4, logistic, svr or dnn")->required();
    calibrate->add_option("--channels", o.channels, "rm1..rm4 (default rm4)");
    calibrate->add_option("--degree", o.degree, "Polynomial degree; must agree with --model");
    calibrate->add_option("--train", o.train, "Training CSV")->required();
    calibrate->add_option("--out", o.out, "Model JSON")->required();
    calibrate->add_option("--report", o.report, "Training metrics JSON");
    calibrate->add_option("--layers", o.layers, "DNN hidden layers: '10', '10,10' or '10x10' (width x depth)");
    calibrate->add_option("--seed", o.seed, "DNN initialisation seed");
    calibrate->add_option("--config", o.config, "INI config ([lm], [svr])");

    auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on a dataset");
    evaluate->add_option("--model", o.model, "Model JSON")->required();
    evaluate->add_option("--data", o.data, "Dataset CSV")->required();
    evaluate->add_option("--report", o.report, "Report JSON")->required();
    evaluate->add_option("--ceg-svg", o.ceg_svg, "Clarke error grid SVG");
    evaluate->add_option("--out", o.out, "Per-point ref,pred,zone CSV");

    auto* crossval = app.add_subcommand("crossval", "k-fold cross-validation");
    crossval->add_option("--model", o.model, "mpr3, mpr4, logistic, svr or dnn")->required();
    crossval->add_option("--channels", o.channels, "rm1..rm4 (default rm4)");
    crossval->add_option("--degree", o.degree, "Polynomial degree; must agree with --model");
    crossval->add_option("--data", o.data, "Dataset CSV")->required();
    crossval->add_option("--folds", o.folds, "Number of folds (default 10)");
    crossval->add_option("--seed", o.seed, "Fold and initialisation seed");
    crossval->add_option("--report", o.report, "Report JSON")->required();
    crossval->add_option("--ceg-svg", o.ceg_svg, "Clarke error grid SVG of pooled predictions");
    crossval->add_option("--out", o.out, "Pooled ref,pred,zone CSV");
    crossval->add_option("--layers", o.layers, "DNN hidden layers");
    crossval->add_option("--config", o.config, "INI config ([lm], [svr])");

    auto* study = app.add_subcommand("study", "Channel-combination study and model comparison");
    study->add_option("--train", o.train, "Calibration CSV")->required();
    study->add_option("--data", o.data, "Validation CSV")->required();
    study->add_option("--degree", o.degree, "Only this polynomial degree (3 or 4)");
    study->add_option("--channels", o.channels, "Channels for the model comparison (default rm4)");
    study->add_option("--layers", o.layers, "DNN hidden layers");
    study->add_option("--seed", o.seed, "DNN initialisation seed");
    study->add_option("--report", o.report, "Report JSON")->required();
    study->add_option("--out", o.out, "Text tables");
    study->add_option("--config", o.config, "INI config ([lm], [svr])");

    auto* stability = app.add_subcommand("stability", "Repeat-measurement stability of a saved model");
    stability->add_option("--model", o.model, "Model JSON")->required();
    stability->add_option("--data", o.data, "Time-ordered CSV of one subject")->required();
    stability->add_option("--report", o.report, "Report JSON")->required();

    auto* ceg = app.add_subcommand("ceg", "Clarke error grid of ref,pred pairs");
    ceg->add_option("--data", o.data, "CSV with header ref,pred[,...]")->required();
    ceg->add_option("--ceg-svg", o.ceg_svg, "SVG output")->required();
    ceg->add_option("--report", o.report, "Report JSON");
    ceg->add_option("--out", o.out, "Per-point ref,pred,zone CSV");

    auto* serve = app.add_subcommand("serve", "Run the telemetry service");
    serve->add_option("--addr", o.addr, "host:port (default 127.0.0.1:8080)");
    serve->add_option("--store", o.store, "Append-only store file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "iglu: error[usage]: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        Runner runner(o, out, err);
        if (simulate->parsed()) runner.simulate();
        else if (calibrate->parsed()) runner.calibrate();
        else if (evaluate->parsed()) runner.evaluate();
        else if (crossval->parsed()) runner.crossval();
        else if (study->parsed()) runner.study();
        else if (stability->parsed()) runner.stability();
        else if (ceg->parsed()) runner.ceg();
        else if (serve->parsed()) runner.serve();
    } catch (const Error& e) {
        err << "iglu: error[" << kind_name(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "iglu: error[numeric]: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitOk;
}

int dispatch(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace iglu::cli
