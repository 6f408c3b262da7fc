#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace baba {

/// Every symbol that can occupy a grid cell. Object classes, their noun
/// words, the connector IS and the property words, in that order.
enum class Sprite : std::uint8_t {
  Empty = 0,

  Baba, Keke, Flag, Rock, Wall, Water, Skull, Lava, Grass, Love, Floor,

  NounBaba, NounKeke, NounFlag, NounRock, NounWall, NounWater, NounSkull,
  NounLava, NounGrass, NounLove, NounFloor,

  Is,

  You, Win, Push, Stop, Move, Kill, Sink, Hot, Melt,
};

inline constexpr int kObjectClassCount = 11;
inline constexpr int kPropertyCount = 9;
inline constexpr int kSpriteCount = 33;

/// Behaviour granted by a NOUN-IS-PROPERTY rule.
enum class Property : std::uint8_t { You, Win, Push, Stop, Move, Kill, Sink, Hot, Melt };

constexpr int to_index(Sprite s) { return static_cast<int>(s); }

constexpr bool is_object(Sprite s) {
  return s >= Sprite::Baba && s <= Sprite::Floor;
}
constexpr bool is_noun(Sprite s) {
  return s >= Sprite::NounBaba && s <= Sprite::NounFloor;
}
constexpr bool is_connector(Sprite s) { return s == Sprite::Is; }
constexpr bool is_property(Sprite s) {
  return s >= Sprite::You && s <= Sprite::Melt;
}
constexpr bool is_word(Sprite s) {
  return is_noun(s) || is_connector(s) || is_property(s);
}

/// Object class index in [0, 11) for an object or noun sprite.
constexpr int class_index(Sprite s) {
  return is_object(s) ? to_index(s) - to_index(Sprite::Baba)
                      : to_index(s) - to_index(Sprite::NounBaba);
}

constexpr Sprite noun_of(Sprite object) {
  return static_cast<Sprite>(to_index(Sprite::NounBaba) + class_index(object));
}
constexpr Sprite object_of(Sprite noun) {
  return static_cast<Sprite>(to_index(Sprite::Baba) + class_index(noun));
}
constexpr Sprite object_from_class(int cls) {
  return static_cast<Sprite>(to_index(Sprite::Baba) + cls);
}

constexpr Property property_of(Sprite word) {
  return static_cast<Property>(to_index(word) - to_index(Sprite::You));
}
constexpr Sprite word_of(Property p) {
  return static_cast<Sprite>(to_index(Sprite::You) + static_cast<int>(p));
}

std::string_view sprite_name(Sprite s);

/// All 33 sprites in enumeration order.
constexpr std::array<Sprite, kSpriteCount> all_sprites() {
  std::array<Sprite, kSpriteCount> out{};
  for (int i = 0; i < kSpriteCount; ++i) out[i] = static_cast<Sprite>(i);
  return out;
}

}  // namespace baba
