//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace fdbn {
namespace {
  std::atomic<LogLevel> g_level { LogLevel::kQuiet };
  std::mutex g_mutex;

  void emit(const char *tag, const std::string &msg) {
    std::lock_guard lock(g_mutex);
    std::cerr << "[fdbn " << tag << "] " << msg << '\n';
  }
}  // namespace

void set_log_level(LogLevel level) {
  g_level = level;
}

LogLevel log_level() {
  return g_level;
}

void log_warning(const std::string &msg) {
  if (g_level >= LogLevel::kWarning)
    emit("warning", msg);
}

void log_info(const std::string &msg) {
  if (g_level >= LogLevel::kInfo)
    emit("info", msg);
}

}  // namespace fdbn
