#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace baba {

enum class ErrorCode { InvalidLevel, Unverified, NotFound, BudgetExhausted, Conflict };

std::string_view error_code_name(ErrorCode code);

/// Row/column of an offending character in level text, both zero based.
struct TextPosition {
  int row = 0;
  int column = 0;
};

/// Failure carrying a machine-readable code. Every rejection the core raises
/// towards a caller is one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<TextPosition> position = std::nullopt)
      : std::runtime_error(message), code_(code), position_(position) {}

  ErrorCode code() const { return code_; }
  const std::optional<TextPosition>& position() const { return position_; }

 private:
  ErrorCode code_;
  std::optional<TextPosition> position_;
};

}  // namespace baba
