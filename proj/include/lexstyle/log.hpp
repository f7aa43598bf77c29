// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string_view>

namespace lexstyle::log {

enum class Level { info, warning };

using Sink = std::function<void(Level, std::string_view)>;

// Replaces the process-wide sink (stderr by default). Returns the previous one.
Sink set_sink(Sink sink);

void info(std::string_view message);
void warning(std::string_view message);

}  // namespace lexstyle::log
