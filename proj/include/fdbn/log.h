//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_LOG_H_
#define FDBN_LOG_H_

#include <string>

namespace fdbn {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();

// Thread-safe, line-buffered writes to stderr.
void log_warning(const std::string &msg);
void log_info(const std::string &msg);

}  // namespace fdbn

#endif  // FDBN_LOG_H_
