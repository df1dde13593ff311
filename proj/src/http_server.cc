// Copyright 2026 The evalbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evalbench/http_server.h"

#include <fmt/format.h>

#include "httplib.h"

namespace evalbench {

namespace {

using json = nlohmann::json;

constexpr const char *kJson = "application/json";

constexpr const char *kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>evalbench</title></head>\n"
    "<body><p>Annotation service is running. No UI bundle was configured "
    "(serve --ui-dir).</p></body></html>\n";

void send_error(httplib::Response &res, const Error &e, json extra = json::object()) {
  extra["error"] = e.qualified_code();
  extra["message"] = e.what();
  res.status = http_status_for(e.code());
  res.set_content(extra.dump(), kJson);
}

void send_json(httplib::Response &res, const json &body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json parse_body(const httplib::Request &req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw json::type_error::create(302, "body must be an object", nullptr);
    return j;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kInvalidArgument, "evalservice",
                fmt::format("request body is not a JSON object: {}", e.what()));
  }
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kFormatError:
    case ErrorCode::kMalformedResponse:
      return 400;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kUnknownSubject:
    case ErrorCode::kUnknownSession:
      return 404;
    case ErrorCode::kOutOfOrder:
    case ErrorCode::kDuplicateSubmission:
    case ErrorCode::kPlanExhausted:
      return 409;
    default:
      return 500;
  }
}

struct HttpServer::Impl {
  EvalService &service;
  ServerOptions options;
  httplib::Server server;
  int port = -1;

  Impl(EvalService &s, ServerOptions o) : service(s), options(std::move(o)) {}

  template <typename F>
  auto guarded(F f) {
    return [f](const httplib::Request &req, httplib::Response &res) {
      try {
        f(req, res);
      } catch (const Error &e) {
        send_error(res, e);
      } catch (const std::exception &e) {
        send_json(res, {{"error", "evalservice.Internal"}, {"message", e.what()}}, 500);
      }
    };
  }

  void routes() {
    server.Post("/api/sessions", guarded([this](const httplib::Request &req,
                                                httplib::Response &res) {
      const json body = parse_body(req);
      if (!body.contains("subject") || !body["subject"].is_string() || !body.contains("task") ||
          !body["task"].is_string()) {
        throw Error(ErrorCode::kInvalidArgument, "evalservice",
                    "expected {\"subject\": string, \"task\": string}");
      }
      const std::string subject = body["subject"].get<std::string>();
      const Task task = parse_task(body["task"].get<std::string>());
      try {
        send_json(res, service.create_session(subject, task).to_json());
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kPlanExhausted) throw;
        const std::string id = session_id_for(task, subject);
        send_error(res, e,
                   {{"session_id", id},
                    {"subject_id", subject},
                    {"task", task_name(task)},
                    {"next", service.cursor(id)},
                    {"n_items", service.cursor(id)}});
      }
    }));

    server.Get(R"(/api/sessions/([^/]+)/next)",
               guarded([this](const httplib::Request &req, httplib::Response &res) {
                 send_json(res, service.next_item(req.matches[1].str()));
               }));

    server.Post(R"(/api/sessions/([^/]+)/responses)",
                guarded([this](const httplib::Request &req, httplib::Response &res) {
                  const std::string id = req.matches[1].str();
                  const json body = parse_body(req);
                  if (!body.contains("item_index") || !body["item_index"].is_number_unsigned() ||
                      !body.contains("response")) {
                    throw Error(ErrorCode::kMalformedResponse, "evalservice",
                                "expected {\"item_index\": n, \"response\": ...}");
                  }
                  const auto r = service.submit_response(
                      id, body["item_index"].get<std::size_t>(), body["response"]);
                  send_json(res, {{"ok", true},
                                  {"record_id", r.record_id},
                                  {"item_index", r.item_index},
                                  {"next", r.item_index + 1}});
                }));

    server.Get("/api/admin/export",
               guarded([this](const httplib::Request &req, httplib::Response &res) {
                 std::string given = req.get_header_value("X-Admin-Token");
                 const std::string auth = req.get_header_value("Authorization");
                 if (given.empty() && auth.rfind("Bearer ", 0) == 0) given = auth.substr(7);
                 if (options.admin_token.empty() || given != options.admin_token) {
                   throw Error(ErrorCode::kUnauthorized, "evalservice",
                               "export requires the admin token");
                 }
                 const std::string format =
                     req.has_param("format") ? req.get_param_value("format") : "jsonl";
                 if (format != "jsonl") {
                   throw Error(ErrorCode::kInvalidArgument, "evalservice",
                               fmt::format("unsupported export format '{}'", format));
                 }
                 std::optional<Task> task;
                 if (req.has_param("task") && !req.get_param_value("task").empty()) {
                   task = parse_task(req.get_param_value("task"));
                 }
                 res.set_content(service.export_responses(task), "application/x-ndjson");
               }));

    if (!options.ui_dir.empty()) {
      if (!server.set_mount_point("/", options.ui_dir)) {
        throw Error(ErrorCode::kIoError, "evalservice",
                    fmt::format("UI directory {} is not readable", options.ui_dir));
      }
    } else {
      server.Get("/", [](const httplib::Request &, httplib::Response &res) {
        res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
      });
    }
  }
};

HttpServer::HttpServer(EvalService &service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  const int threads = std::max(1, impl_->options.threads);
  impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  impl_->server.set_tcp_nodelay(true);
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const auto &o = impl_->options;
  impl_->port = o.port == 0 ? impl_->server.bind_to_any_port(o.host)
                            : (impl_->server.bind_to_port(o.host, o.port) ? o.port : -1);
  if (impl_->port < 0) {
    throw Error(ErrorCode::kIoError, "evalservice",
                fmt::format("cannot bind {}:{}", o.host, o.port));
  }
  return impl_->port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace evalbench
