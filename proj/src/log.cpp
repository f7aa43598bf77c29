// SPDX-License-Identifier: Apache-2.0

#include "lexstyle/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace lexstyle::log {
namespace {

void stderr_sink(Level level, std::string_view message) {
  std::cerr << (level == Level::warning ? "warning: " : "") << message << '\n';
}

std::mutex g_mutex;
Sink g_sink = stderr_sink;

void emit(Level level, std::string_view message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) g_sink(level, message);
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  Sink previous = std::move(g_sink);
  g_sink = sink ? std::move(sink) : Sink(stderr_sink);
  return previous;
}

void info(std::string_view message) { emit(Level::info, message); }
void warning(std::string_view message) { emit(Level::warning, message); }

}  // namespace lexstyle::log
