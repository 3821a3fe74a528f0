#pragma once

namespace hardmeta {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace hardmeta
