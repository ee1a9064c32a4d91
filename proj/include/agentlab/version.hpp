#pragma once

namespace agentlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

}  // namespace agentlab
