#include <atomic>
#include <thread>

#include "alarmrisk/errors.hpp"
#include "alarmrisk/io_util.hpp"
#include "alarmrisk/pipeline.hpp"
#include "alarmrisk/service.hpp"
#include "alarmrisk/synthetic.hpp"
#include "doctest.h"
#include "httplib.h"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace alarmrisk;
using nlohmann::json;
using testutil::TempDir;

namespace {

const BnModel& trained() {
    static const BnModel m = [] {
        const auto rows = synthetic_features(15, 9);
        return train_bn(rows, ModelFamily::Tan, family_features(ModelFamily::Tan, FeatureSet::Behavioural), 1.0);
    }();
    return m;
}

const LrModel& trained_lr() {
    static const LrModel m = [] {
        const auto rows = synthetic_features(15, 9);
        const std::vector<std::string> in{"scenario", "mimics_opened", "response_time"};
        return fit_lr(lr_table(rows, in, false), in);
    }();
    return m;
}

ModelSnapshot snapshot(bool with_lr = false) {
    ModelSnapshot s;
    s.bn = trained();
    if (with_lr) s.lr = trained_lr();
    s.version = "v1";
    return s;
}

int status_of(const ModelSnapshot& s, const json& req) {
    try {
        predict_json(s, req);
    } catch (const RequestError& e) {
        return e.status();
    }
    return 200;
}

}  // namespace

TEST_SUITE("service") {
    TEST_CASE("empty evidence gives the prior") {
        const auto s = snapshot();
        const auto r = predict_json(s, json::object());
        CHECK(r.at("p_error").get<double>() == doctest::Approx(s.bn.prior[1]).epsilon(1e-12));
        CHECK(r.at("missing_features").size() == s.bn.nodes.size());
        CHECK(r.at("model_version") == "v1");
    }

    TEST_CASE("service inference equals the library bit for bit") {
        const auto s = snapshot();
        std::mt19937_64 rng(4);
        for (int k = 0; k < 20; ++k) {
            json ev = json::object();
            std::vector<int> states(s.bn.nodes.size(), -1);
            for (std::size_t i = 0; i < states.size(); ++i) {
                if (rng() % 2) continue;
                states[i] = static_cast<int>(rng() % static_cast<unsigned>(s.bn.nodes[i].cardinality));
                ev[s.bn.nodes[i].name] = states[i];
            }
            const auto r = predict_json(s, {{"evidence", ev}});
            CHECK(r.at("p_error").get<double>() == posterior(s.bn, states)[1]);
            CHECK(r.at("p_error").get<double>() == doctest::Approx(oracle::bn_posterior(s.bn, states)[1]).epsilon(1e-12));
        }
    }

    TEST_CASE("raw values discretize server-side") {
        const auto s = snapshot();
        REQUIRE(s.bn.index_of("num_alarms") >= 0);
        const auto& cuts = s.bn.discretization.at("num_alarms").cuts;
        REQUIRE_FALSE(cuts.empty());
        const double x = cuts.back() + 0.5;
        const auto raw = predict_json(s, {{"raw", {{"num_alarms", x}}}});
        const auto idx = predict_json(s, {{"evidence", {{"num_alarms", static_cast<int>(cuts.size())}}}});
        CHECK(raw.at("p_error") == idx.at("p_error"));
        const auto by_code = predict_json(s, {{"raw", {{"scenario", 3}}}});
        const auto by_label = predict_json(s, {{"evidence", {{"scenario", "S3"}}}});
        CHECK(by_code.at("p_error") == by_label.at("p_error"));
        CHECK(by_code.at("evidence_used").at("scenario").at("label") == "S3");
    }

    TEST_CASE("request errors map to status codes") {
        const auto s = snapshot();
        CHECK(status_of(s, {{"evidence", {{"scenario", 7}}}}) == 400);
        CHECK(status_of(s, {{"evidence", {{"scenario", "S9"}}}}) == 400);
        CHECK(status_of(s, {{"evidence", {{"no_such", 0}}}}) == 400);
        CHECK(status_of(s, {{"raw", {{"num_alarms", "NaN"}}}}) == 422);
        CHECK(status_of(s, {{"raw", {{"scenario", 1.5}}}}) == 400);
        CHECK(status_of(s, {{"evidence", {{"scenario", 1}}}, {"raw", {{"scenario", 2}}}}) == 400);
        CHECK(status_of(s, json::array()) == 400);
        CHECK(status_of(s, {{"evidence", {{"scenario", "unknown"}}}}) == 200);
        CHECK(status_of(s, {{"evidence", {{"scenario", nullptr}}}}) == 200);
    }

    TEST_CASE("features the model does not use are reported, not guessed") {
        const auto s = snapshot();
        const auto r = predict_json(s, {{"evidence", {{"tlx", 0}}}});
        CHECK(r.at("ignored_features") == json::array({"tlx"}));
        CHECK(r.at("p_error").get<double>() == doctest::Approx(s.bn.prior[1]).epsilon(1e-12));
    }

    TEST_CASE("what-if variants") {
        const auto s = snapshot();
        const json base = {{"evidence", {{"scenario", "S2"}}}};
        const auto none = whatif_json(s, {{"base", base}, {"overrides", json::array()}});
        CHECK(none.at("results").empty());

        const std::size_t top = s.bn.discretization.at("num_alarms").cuts.size();
        const auto r = whatif_json(
            s, {{"base", base},
                {"overrides", {{{"feature", "num_alarms"}, {"state", top}}, {{"feature", "tlx"}, {"state", 0}},
                               {{"feature", "scenario"}, {"state", "S3"}}}}});
        const auto& res = r.at("results");
        REQUIRE(res.size() == 3);
        CHECK(res[0].at("delta_vs_base").get<double>() > 0);  // more alarms, more risk
        CHECK(std::abs(res[1].at("delta_vs_base").get<double>()) < 1e-12);
        std::vector<int> ev(s.bn.nodes.size(), -1);
        ev[static_cast<std::size_t>(s.bn.index_of("scenario"))] = 2;
        CHECK(res[2].at("p_error").get<double>() == doctest::Approx(oracle::bn_posterior(s.bn, ev)[1]).epsilon(1e-12));
    }

    TEST_CASE("regression endpoint needs full evidence") {
        CHECK_THROWS_AS(predict_lr_json(snapshot(false), json::object()), RequestError);
        const auto s = snapshot(true);
        const json ok = {{"values", {{"scenario", "S2"}, {"mimics_opened", 2}, {"response_time", 120}}}};
        const auto r = predict_lr_json(s, ok);
        CHECK(r.at("p_error").get<double>() ==
              predict_proba(trained_lr(), std::vector<double>{2, 2, 120}));
        try {
            predict_lr_json(s, {{"values", {{"scenario", 2}}}});
            FAIL("expected 400");
        } catch (const RequestError& e) {
            CHECK(e.status() == 400);
        }
    }

    TEST_CASE("RiskService replies, reload and version echo") {
        TempDir d;
        RiskService svc;
        CHECK(svc.model().status == 503);
        CHECK(svc.predict("{}").status == 503);
        CHECK(svc.health().body.at("model_loaded") == false);

        testutil::write(d / "a.json", dump_artifact(to_json(trained())));
        svc.load(d / "a.json");
        const auto v1 = svc.health().body.at("model_version");
        CHECK(svc.model().status == 200);
        CHECK(svc.model().body.at("features").size() == trained().nodes.size());
        CHECK(svc.predict("{").status == 400);
        CHECK(svc.predict(R"({"evidence":{"scenario":3}})").status == 400);
        CHECK(svc.predict(R"({"raw":{"num_alarms":"inf"}})").status == 422);
        const auto p1 = svc.predict(R"({"evidence":{"scenario":2}})");
        CHECK(p1.body == svc.predict(R"({"evidence":{"scenario":2}})").body);
        CHECK(p1.body.at("model_version") == v1);

        // new content, new version; failed reload keeps the old snapshot
        auto other = trained();
        other.prior = {0.5, 0.5};
        testutil::write(d / "b.json", dump_artifact(to_json(other)));
        CHECK(svc.reload(json{{"model", (d / "b.json").string()}}.dump()).status == 200);
        const auto v2 = svc.health().body.at("model_version");
        CHECK(v2 != v1);
        CHECK(svc.reload(json{{"model", (d / "missing.json").string()}}.dump()).status == 500);
        CHECK(svc.health().body.at("model_version") == v2);
        CHECK(svc.reload("").status == 200);
        CHECK(svc.predict_lr("{}").status == 503);
    }

    TEST_CASE("HTTP round trip with CORS") {
        TempDir d;
        testutil::write(d / "m.json", dump_artifact(to_json(trained())));
        RiskService svc;
        svc.load(d / "m.json");
        auto server = make_http_server(svc);
        const int port = server->bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        std::thread th([&] { server->listen_after_bind(); });
        server->wait_until_ready();

        httplib::Client cli("127.0.0.1", port);
        auto h = cli.Get("/health");
        REQUIRE(h);
        CHECK(h->status == 200);
        CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");
        auto m = cli.Get("/model");
        REQUIRE(m);
        CHECK(json::parse(m->body).at("features").size() == trained().nodes.size());

        const std::string req = R"({"evidence":{"scenario":"S3"},"raw":{"num_alarms":12}})";
        auto p = cli.Post("/predict", req, "application/json");
        REQUIRE(p);
        CHECK(p->status == 200);
        CHECK(json::parse(p->body) == predict_json(*svc.snapshot(), json::parse(req)));
        auto bad = cli.Post("/predict", R"({"evidence":{"scenario":9}})", "application/json");
        REQUIRE(bad);
        CHECK(bad->status == 400);
        auto w = cli.Post("/whatif", R"({"base":{},"overrides":[{"feature":"scenario","state":0}]})", "application/json");
        REQUIRE(w);
        CHECK(json::parse(w->body).at("results").size() == 1);
        auto lr = cli.Post("/predict-lr", "{}", "application/json");
        REQUIRE(lr);
        CHECK(lr->status == 503);
        auto pre = cli.Options("/predict");
        REQUIRE(pre);
        CHECK(pre->status == 204);

        // concurrent readers during reloads always see one coherent version
        std::atomic<bool> ok{true};
        std::vector<std::thread> readers;
        for (int t = 0; t < 3; ++t)
            readers.emplace_back([&] {
                httplib::Client c("127.0.0.1", port);
                for (int i = 0; i < 15; ++i) {
                    auto r = c.Post("/predict", "{}", "application/json");
                    if (!r || r->status != 200 || !json::parse(r->body).at("model_version").is_string()) ok = false;
                }
            });
        for (int i = 0; i < 5; ++i) CHECK(cli.Post("/reload", "{}", "application/json")->status == 200);
        for (auto& r : readers) r.join();
        CHECK(ok);

        server->stop();
        th.join();
    }
}
