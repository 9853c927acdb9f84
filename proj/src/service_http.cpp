#include "httplib.h"

#include "alarmrisk/service.hpp"

namespace alarmrisk {

std::unique_ptr<httplib::Server> make_http_server(RiskService& service) {
    auto server = std::make_unique<httplib::Server>();
    server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server->Get("/health", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
    server->Get("/model", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.model()); });
    server->Post("/predict", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.predict(req.body));
    });
    server->Post("/whatif", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.whatif(req.body));
    });
    server->Post("/predict-lr", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.predict_lr(req.body));
    });
    server->Post("/reload", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.reload(req.body));
    });
    server->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    return server;
}

}  // namespace alarmrisk
