#pragma once

namespace udalab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace udalab
