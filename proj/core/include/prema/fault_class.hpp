#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace prema {

// The four valve health categories. The numeric value is the one-hot index
// used by the fault model.
enum class FaultClass : std::uint8_t {
  kGood = 0,
  kSpoolStuck = 1,
  kSpringFailure = 2,
  kUnderVoltage = 3,
};

inline constexpr std::size_t kNumFaultClasses = 4;

inline constexpr std::array<FaultClass, kNumFaultClasses> kAllFaultClasses = {
    FaultClass::kGood, FaultClass::kSpoolStuck, FaultClass::kSpringFailure,
    FaultClass::kUnderVoltage};

constexpr std::size_t index_of(FaultClass c) {
  return static_cast<std::size_t>(c);
}

constexpr std::string_view to_string(FaultClass c) {
  switch (c) {
    case FaultClass::kGood:
      return "good";
    case FaultClass::kSpoolStuck:
      return "spool_stuck";
    case FaultClass::kSpringFailure:
      return "spring_failure";
    case FaultClass::kUnderVoltage:
      return "under_voltage";
  }
  return "unknown";
}

constexpr std::optional<FaultClass> parse_fault_class(std::string_view s) {
  for (FaultClass c : kAllFaultClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

}  // namespace prema
