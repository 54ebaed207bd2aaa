#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace iglu::telemetry {

struct TelemetryRecord {
    std::uint64_t seq = 0;  // server-assigned
    std::string patient_id;
    std::string device_id;
    double glucose_est = 0.0;  // mg/dl
    std::string model_id;
    std::int64_t timestamp = 0;    // device clock, UTC seconds
    std::int64_t received_at = 0;  // server clock, UTC seconds

    bool operator==(const TelemetryRecord&) const = default;
};

inline constexpr std::int64_t kClockSkewSeconds = 300;

struct Rejection {
    std::string field;
    std::string reason;
};

/// Checks a submitted record against the store's invariants.
std::optional<Rejection> validate(const TelemetryRecord& r, std::int64_t now);

std::string to_json_line(const TelemetryRecord& r);
std::optional<TelemetryRecord> from_json_line(const std::string& line);

using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_seconds();

/// Append-only newline-delimited JSON log with an in-memory per-patient
/// index rebuilt from the file on open. Appends are serialized and synced to
/// disk before the sequence number is returned.
class Store {
public:
    explicit Store(std::filesystem::path path, Clock clock = system_clock_seconds);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    struct IngestResult {
        std::optional<std::uint64_t> seq;
        std::optional<Rejection> rejection;
        std::optional<std::string> storage_error;
    };

    /// Validates, stamps received_at and seq, appends, syncs.
    IngestResult ingest(TelemetryRecord r);

    /// Records of `patient_id` with timestamp in [from, to], ordered by (timestamp, seq).
    std::vector<TelemetryRecord> query(const std::string& patient_id, std::int64_t from, std::int64_t to) const;

    std::size_t size() const;
    std::uint64_t last_seq() const;
    /// Byte offsets of lines skipped as corrupt while opening.
    const std::vector<std::uint64_t>& skipped_offsets() const { return skipped_; }

    void flush();

private:
    void load();

    std::filesystem::path path_;
    Clock clock_;
    int fd_ = -1;
    std::mutex append_mutex_;
    mutable std::shared_mutex index_mutex_;
    std::map<std::string, std::vector<TelemetryRecord>> by_patient_;
    std::size_t count_ = 0;
    std::uint64_t next_seq_ = 1;
    std::vector<std::uint64_t> skipped_;
};

/// HTTP/1.1 front end:
///   POST /readings             one JSON record -> 201 {"seq": n}
///   GET  /readings?patient=&from=&to=  -> 200 JSON array
///   GET  /health               -> 200 {"status": "ok", "records": n}
class Service {
public:
    Service(const std::filesystem::path& store_path, Clock clock = system_clock_seconds);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds host:port; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop(); blocks the calling thread.
    void run();
    void stop();
    bool running() const;

    Store& store() { return *store_; }

private:
    struct Impl;
    std::unique_ptr<Store> store_;
    std::unique_ptr<Impl> impl_;
};

/// Parses "host:port" (host may be omitted, defaulting to 127.0.0.1).
std::pair<std::string, int> parse_bind_address(const std::string& addr);

}  // namespace iglu::telemetry
