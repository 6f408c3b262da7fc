#include "baba/level_text.hpp"

#include <array>

#include "baba/error.hpp"

namespace baba {

namespace {

constexpr std::string_view kAlphabet = ".bkfrwaslgvtBKFRWASLGVT1234567890";

static_assert(kAlphabet.size() == kSpriteCount);

}  // namespace

char sprite_char(Sprite s) { return kAlphabet[to_index(s)]; }

std::optional<Sprite> sprite_from_char(char c) {
  const auto pos = kAlphabet.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<Sprite>(pos);
}

LevelGrid decode_level(std::string_view text) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorCode::InvalidLevel, "level text is empty");

  std::vector<std::string_view> rows;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    rows.push_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }

  const int width = static_cast<int>(rows.front().size());
  if (width == 0) throw Error(ErrorCode::InvalidLevel, "row 0 is empty", TextPosition{0, 0});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      const int col = std::min(static_cast<int>(rows[r].size()), width);
      throw Error(ErrorCode::InvalidLevel,
                  "row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                      " cells, expected " + std::to_string(width),
                  TextPosition{static_cast<int>(r), col});
    }
  }

  LevelGrid grid(width, static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < width; ++c) {
      const auto sprite = sprite_from_char(rows[r][c]);
      if (!sprite) {
        throw Error(ErrorCode::InvalidLevel,
                    "unknown character '" + std::string(1, rows[r][c]) + "'",
                    TextPosition{static_cast<int>(r), c});
      }
      grid.place({c, static_cast<int>(r)}, *sprite);
    }
  }
  return grid;
}

std::string encode_level(const LevelGrid& grid) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.width() + 1) * grid.height());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Stack& stack = grid.at({x, y});
      if (stack.size() > 1) {
        throw Error(ErrorCode::InvalidLevel, "cell (" + std::to_string(x) + "," +
                                                 std::to_string(y) +
                                                 ") holds a stack; only design-time grids encode",
                    TextPosition{y, x});
      }
      out.push_back(sprite_char(stack.empty() ? Sprite::Empty : stack.front().sprite));
    }
    out.push_back('\n');
  }
  return out;
}

char action_char(Action a) {
  constexpr std::array<char, 5> kChars = {'U', 'D', 'L', 'R', 'W'};
  return kChars[static_cast<int>(a)];
}

std::string encode_solution(const std::vector<Action>& actions) {
  std::string out;
  out.reserve(actions.size());
  for (Action a : actions) out.push_back(action_char(a));
  return out;
}

std::vector<Action> decode_solution(std::string_view text) {
  std::vector<Action> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case 'U': out.push_back(Action::Up); break;
      case 'D': out.push_back(Action::Down); break;
      case 'L': out.push_back(Action::Left); break;
      case 'R': out.push_back(Action::Right); break;
      case 'W': out.push_back(Action::Wait); break;
      default:
        throw Error(ErrorCode::InvalidLevel, "invalid action '" + std::string(1, text[i]) +
                                                 "' at index " + std::to_string(i),
                    TextPosition{0, static_cast<int>(i)});
    }
  }
  return out;
}

}  // namespace baba
