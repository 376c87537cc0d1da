#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pacisle {

/// Every failure carries a stable machine-readable code (e.g. "OrderOverflow")
/// plus free-form detail. The CLI prints them as `error: <code>: <detail>`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string detail)
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(std::move(detail)) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

namespace errc {
inline constexpr const char* kDimensionMismatch = "DimensionMismatch";
inline constexpr const char* kSingularMatrix = "SingularMatrix";
inline constexpr const char* kInvalidField = "InvalidField";
inline constexpr const char* kPackageMismatch = "PackageMismatch";
inline constexpr const char* kOrderOverflow = "OrderOverflow";
inline constexpr const char* kUnknownSignature = "UnknownSignature";
inline constexpr const char* kNotInIsland = "NotInIsland";
inline constexpr const char* kKernelSearchExhausted = "KernelSearchExhausted";
inline constexpr const char* kNotConjugate = "NotConjugate";
inline constexpr const char* kNotInClassK = "NotInClassK";
inline constexpr const char* kLasVegasFailure = "LasVegasFailure";
inline constexpr const char* kInvariantBreach = "InvariantBreach";
inline constexpr const char* kGroupTooLarge = "GroupTooLarge";
inline constexpr const char* kGroupOrderMismatch = "GroupOrderMismatch";
inline constexpr const char* kNoAnchorsFound = "NoAnchorsFound";
inline constexpr const char* kPostTailNotFound = "PostTailNotFound";
inline constexpr const char* kIslandNotCentralizer = "IslandNotCentralizer";
inline constexpr const char* kInvalidSpec = "InvalidSpec";
inline constexpr const char* kVerificationFailure = "VerificationFailure";
inline constexpr const char* kParseError = "ParseError";
inline constexpr const char* kIo = "IoError";
inline constexpr const char* kUsage = "Usage";
}  // namespace errc

}  // namespace pacisle
