#pragma once
// Live error-probability service over a trained Bayesian-network model.
//
// Handlers are plain functions of (snapshot, request body) returning a status
// and a JSON body, so the HTTP layer stays thin and the CLI can answer the
// same requests offline. Requests read one immutable snapshot; reload swaps
// the shared pointer under a mutex.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "alarmrisk/bayes_net.hpp"
#include "alarmrisk/logistic.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace alarmrisk {

struct Reply {
    int status = 200;
    nlohmann::json body;
};

// Carries the HTTP status for a rejected request (400, 422, 503).
class RequestError : public std::runtime_error {
public:
    RequestError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

struct ModelSnapshot {
    BnModel bn;
    std::optional<LrModel> lr;
    std::string version;
};

struct ParsedEvidence {
    std::vector<int> states;  // per model node, -1 = unobserved
    nlohmann::json used = nlohmann::json::object();
    std::vector<std::string> missing;  // model features left unobserved
    std::vector<std::string> ignored;  // known features the model does not use
};

// Request shape: {"evidence": {name: index | label}, "raw": {name: number}}.
ParsedEvidence parse_evidence(const BnModel& model, const nlohmann::json& request);
nlohmann::json predict_json(const ModelSnapshot& snap, const nlohmann::json& request);
nlohmann::json whatif_json(const ModelSnapshot& snap, const nlohmann::json& request);
nlohmann::json predict_lr_json(const ModelSnapshot& snap, const nlohmann::json& request);

// Model documents as written by `train`; a stepwise document is unwrapped.
BnModel load_bn_model(const std::filesystem::path& path);
LrModel load_lr_model(const std::filesystem::path& path);
// Content hash of the model file(s).
std::string model_version(const std::filesystem::path& bn, const std::optional<std::filesystem::path>& lr);

class RiskService {
public:
    RiskService() = default;

    // Loads and swaps in a new snapshot; on failure the old one stays.
    void load(const std::filesystem::path& bn_path, const std::optional<std::filesystem::path>& lr_path = {});
    void set_snapshot(std::shared_ptr<const ModelSnapshot> snap);
    std::shared_ptr<const ModelSnapshot> snapshot() const;

    Reply health() const;
    Reply model() const;
    Reply predict(const std::string& body) const;
    Reply whatif(const std::string& body) const;
    Reply predict_lr(const std::string& body) const;
    // Body may name new paths: {"model": path, "lr_model": path}; empty = same paths.
    Reply reload(const std::string& body);

private:
    template <class F>
    Reply guarded(const std::string& body, F&& handler) const;

    mutable std::mutex mutex_;
    std::shared_ptr<const ModelSnapshot> snap_;
    std::optional<std::filesystem::path> bn_path_, lr_path_;
    unsigned long loads_ = 0;
};

// Routes, CORS headers and preflight on an httplib server.
std::unique_ptr<httplib::Server> make_http_server(RiskService& service);

}  // namespace alarmrisk
