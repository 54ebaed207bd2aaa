#include "iglu/telemetry.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "iglu/error.hpp"

namespace iglu::telemetry {

using Json = nlohmann::ordered_json;

std::int64_t system_clock_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::optional<Rejection> validate(const TelemetryRecord& r, std::int64_t now) {
    if (r.patient_id.empty()) return Rejection{"patient_id", "patient_id required"};
    if (r.device_id.empty()) return Rejection{"device_id", "device_id required"};
    if (!std::isfinite(r.glucose_est) || r.glucose_est <= 0.0 || r.glucose_est >= 600.0)
        return Rejection{"glucose_est", "glucose out of range"};
    if (r.timestamp > now + kClockSkewSeconds) return Rejection{"timestamp", "timestamp ahead of server clock"};
    return std::nullopt;
}

std::string to_json_line(const TelemetryRecord& r) {
    Json j;
    j["seq"] = r.seq;
    j["patient_id"] = r.patient_id;
    j["device_id"] = r.device_id;
    j["glucose_est"] = r.glucose_est;
    j["model_id"] = r.model_id;
    j["timestamp"] = r.timestamp;
    j["received_at"] = r.received_at;
    return j.dump();
}

namespace {

Json record_json(const TelemetryRecord& r) { return Json::parse(to_json_line(r)); }

bool before(const TelemetryRecord& a, const TelemetryRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.seq < b.seq;
}

}  // namespace

std::optional<TelemetryRecord> from_json_line(const std::string& line) {
    try {
        const auto j = Json::parse(line);
        if (!j.is_object()) return std::nullopt;
        TelemetryRecord r;
        r.seq = j.at("seq").get<std::uint64_t>();
        r.patient_id = j.at("patient_id").get<std::string>();
        r.device_id = j.at("device_id").get<std::string>();
        r.glucose_est = j.at("glucose_est").get<double>();
        r.model_id = j.at("model_id").get<std::string>();
        r.timestamp = j.at("timestamp").get<std::int64_t>();
        r.received_at = j.at("received_at").get<std::int64_t>();
        if (r.seq == 0) return std::nullopt;
        return r;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
}

Store::Store(std::filesystem::path path, Clock clock) : path_(std::move(path)), clock_(std::move(clock)) {
    load();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw io_error("cannot open store " + path_.string() + ": " + std::strerror(errno));
    // Terminate a torn final line so the next append starts cleanly.
    std::error_code ec;
    const auto size = std::filesystem::file_size(path_, ec);
    if (!ec && size > 0) {
        std::ifstream in(path_, std::ios::binary);
        in.seekg(static_cast<std::streamoff>(size) - 1);
        char last = '\n';
        in.get(last);
        if (last != '\n' && ::write(fd_, "\n", 1) != 1) throw io_error("cannot repair store tail");
    }
}

Store::~Store() {
    if (fd_ >= 0) ::close(fd_);
}

void Store::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh store
    std::string line;
    std::uint64_t offset = 0;
    while (std::getline(in, line)) {
        const std::uint64_t line_offset = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        auto rec = from_json_line(line);
        if (!rec) {
            skipped_.push_back(line_offset);
            std::cerr << "telemetry: skipping corrupt store line at offset " << line_offset << '\n';
            continue;
        }
        next_seq_ = std::max(next_seq_, rec->seq + 1);
        auto& v = by_patient_[rec->patient_id];
        v.insert(std::upper_bound(v.begin(), v.end(), *rec, before), *rec);
        ++count_;
    }
}

Store::IngestResult Store::ingest(TelemetryRecord r) {
    IngestResult res;
    std::lock_guard append_lock(append_mutex_);
    r.received_at = clock_();
    if (auto rej = validate(r, r.received_at)) {
        res.rejection = std::move(rej);
        return res;
    }
    r.seq = next_seq_;
    const std::string line = to_json_line(r) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const auto n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            res.storage_error = std::string("append failed: ") + std::strerror(errno);
            return res;
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0) {
        res.storage_error = std::string("sync failed: ") + std::strerror(errno);
        return res;
    }
    ++next_seq_;
    {
        std::unique_lock index_lock(index_mutex_);
        auto& v = by_patient_[r.patient_id];
        v.insert(std::upper_bound(v.begin(), v.end(), r, before), r);
        ++count_;
    }
    res.seq = r.seq;
    return res;
}

std::vector<TelemetryRecord> Store::query(const std::string& patient_id, std::int64_t from, std::int64_t to) const {
    if (from > to) throw data_error("query range has from > to");
    std::shared_lock lock(index_mutex_);
    std::vector<TelemetryRecord> out;
    const auto it = by_patient_.find(patient_id);
    if (it == by_patient_.end()) return out;
    for (const auto& r : it->second)
        if (r.timestamp >= from && r.timestamp <= to) out.push_back(r);
    return out;
}

std::size_t Store::size() const {
    std::shared_lock lock(index_mutex_);
    return count_;
}

std::uint64_t Store::last_seq() const {
    std::shared_lock lock(index_mutex_);
    return next_seq_ - 1;
}

void Store::flush() {
    std::lock_guard lock(append_mutex_);
    if (fd_ >= 0) ::fdatasync(fd_);
}

std::pair<std::string, int> parse_bind_address(const std::string& addr) {
    const auto colon = addr.rfind(':');
    std::string host = colon == std::string::npos ? std::string() : addr.substr(0, colon);
    const std::string port_text = colon == std::string::npos ? addr : addr.substr(colon + 1);
    if (host.empty()) host = "127.0.0.1";
    int port = 0;
    try {
        std::size_t used = 0;
        port = std::stoi(port_text, &used);
        if (used != port_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw usage_error("bad bind address '" + addr + "' (expected host:port)");
    }
    if (port < 0 || port > 65535) throw usage_error("port out of range in '" + addr + "'");
    return {host, port};
}

struct Service::Impl {
    httplib::Server server;
    std::atomic<bool> bound{false};
    std::atomic<bool> stop_requested{false};
    std::atomic<bool> run_started{false};
    std::atomic<bool> run_finished{false};
};

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& field, const std::string& reason) {
    Json j;
    j["error"] = reason;
    if (!field.empty()) j["field"] = field;
    reply_json(res, status, j);
}

bool parse_int_param(const httplib::Request& req, const char* name, std::int64_t& out) {
    if (!req.has_param(name)) return false;
    const auto v = req.get_param_value(name);
    try {
        std::size_t used = 0;
        out = std::stoll(v, &used);
        return used == v.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Service::Service(const std::filesystem::path& store_path, Clock clock)
    : store_(std::make_unique<Store>(store_path, std::move(clock))), impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;
    Store* store = store_.get();

    svr.Post("/readings", [store](const httplib::Request& req, httplib::Response& res) {
        Json body;
        try {
            body = Json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            reply_error(res, 400, "", "body is not valid JSON");
            return;
        }
        if (!body.is_object()) {
            reply_error(res, 400, "", "body must be a JSON object");
            return;
        }
        TelemetryRecord r;
        const char* current = "";
        try {
            current = "patient_id";
            r.patient_id = body.at(current).get<std::string>();
            current = "device_id";
            r.device_id = body.at(current).get<std::string>();
            current = "glucose_est";
            r.glucose_est = body.at(current).get<double>();
            current = "model_id";
            r.model_id = body.at(current).get<std::string>();
            current = "timestamp";
            r.timestamp = body.at(current).get<std::int64_t>();
        } catch (const nlohmann::json::exception&) {
            reply_error(res, 400, current, std::string("missing or invalid ") + current);
            return;
        }
        auto out = store->ingest(std::move(r));
        if (out.rejection) {
            reply_error(res, 400, out.rejection->field, out.rejection->reason);
        } else if (out.storage_error) {
            reply_error(res, 500, "", *out.storage_error);
        } else {
            reply_json(res, 201, Json{{"seq", *out.seq}});
        }
    });

    svr.Get("/readings", [store](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("patient") || req.get_param_value("patient").empty()) {
            reply_error(res, 400, "patient", "patient parameter required");
            return;
        }
        std::int64_t from = 0, to = 0;
        if (!parse_int_param(req, "from", from)) {
            reply_error(res, 400, "from", "from must be an integer epoch");
            return;
        }
        if (!parse_int_param(req, "to", to)) {
            reply_error(res, 400, "to", "to must be an integer epoch");
            return;
        }
        if (from > to) {
            reply_error(res, 400, "from", "malformed range: from > to");
            return;
        }
        Json arr = Json::array();
        for (const auto& r : store->query(req.get_param_value("patient"), from, to)) arr.push_back(record_json(r));
        reply_json(res, 200, arr);
    });

    svr.Get("/health", [store](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, Json{{"status", "ok"}, {"records", store->size()}});
    });
}

Service::~Service() {
    stop();
    store_->flush();
}

int Service::bind(const std::string& host, int port) {
    int bound = -1;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (impl_->server.bind_to_port(host, port)) {
        bound = port;
    }
    if (bound <= 0) throw io_error("cannot bind " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void Service::run() {
    if (!impl_->bound) throw usage_error("service is not bound");
    impl_->run_started = true;
    if (!impl_->stop_requested) impl_->server.listen_after_bind();
    impl_->run_finished = true;
    store_->flush();
}

void Service::stop() {
    impl_->stop_requested = true;
    if (!impl_->run_started) return;
    // A stop racing with run() waits until the listener is up (or run() has returned).
    while (!impl_->server.is_running() && !impl_->run_finished) std::this_thread::yield();
    impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace iglu::telemetry
