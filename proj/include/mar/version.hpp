#pragma once

namespace mar {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mar
