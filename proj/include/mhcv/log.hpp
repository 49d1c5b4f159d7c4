#pragma once

#include <functional>
#include <string_view>

namespace mhcv {

/// Destination for numerical warnings (clamped kernel rows and the like).
/// Defaults to standard error; tests and the CLI may redirect it.
using WarningSink = std::function<void(std::string_view)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace mhcv
