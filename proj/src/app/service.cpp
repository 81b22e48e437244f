#include "rider/app/service.hpp"

#include <mutex>

#include <httplib.h>

#include "rider/app/queries.hpp"
#include "rider/warehouse/indicators.hpp"

namespace rider::app {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

std::string param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) throw std::invalid_argument(std::string("missing query parameter '") + key + "'");
  return req.get_param_value(key);
}

// Runs a handler, mapping bad input to 400 and anything else to 500.
template <class F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const std::invalid_argument& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const warehouse::WarehouseError& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const field::FieldError& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

Service::Service(std::unique_ptr<warehouse::Store> store, std::optional<harness::HarnessConfig> plant)
    : store_(std::move(store)), plant_(std::move(plant)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::Service(std::unique_ptr<Pipeline> pipeline)
    : pipeline_(std::move(pipeline)), server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() { stop(); }

const warehouse::Warehouse& Service::warehouse() const {
  return store_ ? store_->warehouse() : pipeline_->warehouse();
}

std::vector<ingest::ExceptionRecord> Service::quarantine() const {
  return store_ ? store_->quarantine() : pipeline_->ingest().quarantine();
}

const harness::HarnessConfig* Service::plant() const {
  if (pipeline_) return &pipeline_->harness_config();
  return plant_ ? &*plant_ : nullptr;
}

void Service::routes() {
  auto& s = *server_;

  s.Get("/v1/sensors", guarded([this](const httplib::Request&, httplib::Response& res) {
          std::shared_lock lock(mutex_);
          reply(res, 200, sensors_json(warehouse().index()));
        }));

  s.Get("/v1/measures", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const auto agg_text = req.has_param("agg") ? req.get_param_value("agg") : std::string("raw");
          const auto agg = warehouse::parse_aggregation(agg_text);
          if (!agg) throw std::invalid_argument("unknown aggregation '" + agg_text + "'");
          std::shared_lock lock(mutex_);
          reply(res, 200,
                measures_json(warehouse(), param(req, "sensor"), require_time(param(req, "from")),
                              require_time(param(req, "to")), *agg));
        }));

  s.Get(R"(/v1/indicators/([a-z\-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const std::string kind = req.matches[1];
          std::vector<std::pair<std::string, std::string>> pairs;
          for (const auto& [k, v] : req.params)
            if (k != "from" && k != "to") pairs.emplace_back(k, v);
          const warehouse::Window w{require_time(param(req, "from")), require_time(param(req, "to"))};
          std::shared_lock lock(mutex_);
          const auto result = warehouse::compute_indicator(warehouse(), kind, indicator_params(pairs), w, plant());
          reply(res, 200, result.to_json());
        }));

  s.Get("/v1/exceptions", guarded([this](const httplib::Request& req, httplib::Response& res) {
          std::optional<ingest::ExceptionClass> only;
          if (req.has_param("class")) {
            only = ingest::parse_exception_class(req.get_param_value("class"));
            if (!only) throw std::invalid_argument("unknown exception class '" + req.get_param_value("class") + "'");
          }
          std::shared_lock lock(mutex_);
          reply(res, 200, exceptions_json(quarantine(), only));
        }));

  s.Post("/v1/ticks", guarded([this](const httplib::Request& req, httplib::Response& res) {
           if (!pipeline_) return reply(res, 409, {{"error", "this service is read-only; start it with a pipeline config"}});
           std::int64_t n = 1;
           if (req.has_param("n")) {
             n = std::stoll(req.get_param_value("n"));
           } else if (!req.body.empty()) {
             const auto body = json::parse(req.body, nullptr, false);
             if (body.is_discarded() || !body.is_object()) throw std::invalid_argument("body must be a JSON object");
             n = body.value("n", std::int64_t{1});
           }
           if (n < 1) throw std::invalid_argument("n must be positive");
           std::unique_lock lock(mutex_);
           const auto done = pipeline_->advance(n);
           pipeline_->save();
           reply(res, 200, {{"advanced", done}, {"report", pipeline_->report().to_json()}});
         }));

  s.Get("/v1/field", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const auto mode = field::parse_mode(req.has_param("mode") ? req.get_param_value("mode") : "delaunay");
          if (!mode) throw std::invalid_argument("mode must be delaunay or voronoi");
          const auto t = require_time(param(req, "t"));
          const double z = req.has_param("slice_z") ? std::stod(req.get_param_value("slice_z")) : 0.0;
          const auto r = parse_resolution(req.has_param("res") ? req.get_param_value("res") : "50x50x1");
          std::shared_lock lock(mutex_);
          const auto f = field_at(warehouse(), t, z, *mode, r);
          if (req.get_header_value("Accept").find("application/octet-stream") != std::string::npos) {
            res.status = 200;
            res.set_content(field::encode_rfld(f), "application/octet-stream");
          } else {
            reply(res, 200, field_json(f));
          }
        }));
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace rider::app
