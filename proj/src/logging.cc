// Copyright 2026 The dexchange Authors
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

#include "dexchange/logging.h"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace dexchange {

void ConfigureLoggingFromEnv() {
  const char* raw = std::getenv("EXCHANGE_LOG");
  const std::string level = raw ? raw : "error";
  spdlog::level::level_enum parsed;
  if (level == "error") {
    parsed = spdlog::level::err;
  } else if (level == "info") {
    parsed = spdlog::level::info;
  } else if (level == "debug") {
    parsed = spdlog::level::debug;
  } else {
    throw std::invalid_argument("EXCHANGE_LOG must be error, info or debug");
  }
  // Idempotent: the named logger is registered once per process.
  auto logger = spdlog::get("dexchange");
  if (!logger) logger = spdlog::stderr_color_mt("dexchange");
  spdlog::set_default_logger(logger);
  spdlog::set_level(parsed);
}

}  // namespace dexchange
