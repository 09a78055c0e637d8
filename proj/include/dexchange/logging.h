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

#ifndef DEXCHANGE_LOGGING_H_
#define DEXCHANGE_LOGGING_H_

namespace dexchange {

// Sets the global log level from EXCHANGE_LOG (error | info | debug, default
// error) and routes logs to stderr. Throws std::invalid_argument on any
// other value.
void ConfigureLoggingFromEnv();

}  // namespace dexchange

#endif  // DEXCHANGE_LOGGING_H_
