#pragma once

namespace hyperlens {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hyperlens
