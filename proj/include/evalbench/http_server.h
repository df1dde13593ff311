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

// HTTP+JSON front end for EvalService.
//
//   POST /api/sessions                  {"subject","task"}
//   GET  /api/sessions/{id}/next
//   POST /api/sessions/{id}/responses   {"item_index","response"}
//   GET  /api/admin/export?task=&format=jsonl   (admin token required)
//   GET  /                              UI bundle
//
// Errors are {"error":"<module>.<Code>","message"} with 400 (malformed),
// 401 (admin token), 404 (unknown subject/session) or 409 (ordering,
// duplicates, exhausted plans).

#ifndef EVALBENCH_HTTP_SERVER_H_
#define EVALBENCH_HTTP_SERVER_H_

#include <memory>
#include <string>

#include "evalbench/common.h"
#include "evalbench/evalservice.h"

namespace evalbench {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string admin_token;  // empty disables export
  std::string ui_dir;       // static files for "/", optional
  int threads = 8;
};

int http_status_for(ErrorCode code);

class HttpServer {
 public:
  HttpServer(EvalService &service, ServerOptions options);
  ~HttpServer();

  // Binds and returns the bound port.
  int bind();
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evalbench

#endif  // EVALBENCH_HTTP_SERVER_H_
