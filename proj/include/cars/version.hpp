#pragma once

namespace cars {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "1";

}  // namespace cars
