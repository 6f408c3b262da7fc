#include "baba/sprite.hpp"

#include "baba/error.hpp"

namespace baba {

namespace {

constexpr std::array<std::string_view, kSpriteCount> kNames = {
    "empty",
    "baba", "keke", "flag", "rock", "wall", "water", "skull", "lava", "grass", "love", "floor",
    "BABA", "KEKE", "FLAG", "ROCK", "WALL", "WATER", "SKULL", "LAVA", "GRASS", "LOVE", "FLOOR",
    "IS",
    "YOU", "WIN", "PUSH", "STOP", "MOVE", "KILL", "SINK", "HOT", "MELT",
};

}  // namespace

std::string_view sprite_name(Sprite s) { return kNames[to_index(s)]; }

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLevel: return "invalid_level";
    case ErrorCode::Unverified: return "unverified";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::BudgetExhausted: return "budget_exhausted";
    case ErrorCode::Conflict: return "conflict";
  }
  return "unknown";
}

}  // namespace baba
