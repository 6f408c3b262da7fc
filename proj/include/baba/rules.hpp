#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "baba/grid.hpp"
#include "baba/sprite.hpp"

namespace baba {

/// NOUN-IS-(NOUN|PROPERTY).
struct Rule {
  Sprite subject = Sprite::Empty;
  Sprite complement = Sprite::Empty;

  friend auto operator<=>(const Rule&, const Rule&) = default;
};

std::string to_string(const Rule& rule);

/// Set of properties active on one object class.
using PropertySet = std::bitset<kPropertyCount>;

struct Transformation {
  int from_class = 0;
  int to_class = 0;

  friend bool operator==(const Transformation&, const Transformation&) = default;
};

/// Active rules of a grid plus the derived per-class view.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::set<Rule> rules);
  RuleSet(std::initializer_list<Rule> rules) : RuleSet(std::set<Rule>(rules)) {}

  const std::set<Rule>& rules() const { return rules_; }
  bool contains(const Rule& r) const { return rules_.count(r) != 0; }
  bool empty() const { return rules_.empty(); }

  const PropertySet& properties(int cls) const { return properties_[cls]; }
  bool has(Sprite object, Property p) const {
    return is_object(object) && properties_[class_index(object)].test(static_cast<int>(p));
  }
  bool any_class_has(Property p) const;

  /// Non-reflexive noun rules whose subject is not protected by X-IS-X.
  /// One target per source class: the lowest noun wins when several apply.
  const std::vector<Transformation>& transformations() const { return transformations_; }

  friend bool operator==(const RuleSet& a, const RuleSet& b) { return a.rules_ == b.rules_; }

 private:
  std::set<Rule> rules_;
  std::array<PropertySet, kObjectClassCount> properties_{};
  std::vector<Transformation> transformations_;
};

/// Canonical flag order used for the archive's behaviour key.
enum class RuleFlag : std::uint8_t {
  Reflexive,      // X-IS-X
  Transform,      // X-IS-Y
  Push,
  Move,
  Stop,
  Kill,
  Sink,
  HotMeltPair,    // X-IS-HOT together with X-IS-MELT
  MultipleYou,    // X,Y-IS-YOU
};

inline constexpr int kRuleFlagCount = 9;

struct RuleFlags {
  std::bitset<kRuleFlagCount> bits;

  bool test(RuleFlag f) const { return bits.test(static_cast<int>(f)); }
  RuleFlags& set(RuleFlag f, bool value = true) {
    bits.set(static_cast<int>(f), value);
    return *this;
  }
  std::uint32_t to_uint() const { return static_cast<std::uint32_t>(bits.to_ulong()); }
  static RuleFlags from_uint(std::uint32_t v) { return RuleFlags{std::bitset<kRuleFlagCount>(v)}; }

  friend bool operator==(const RuleFlags&, const RuleFlags&) = default;
};

/// Goal wording for a flag, e.g. "X-IS-PUSH".
std::string_view rule_flag_label(RuleFlag f);

/// Every left-to-right and top-to-bottom NOUN IS (NOUN|PROPERTY) triple.
RuleSet scan_rules(const LevelGrid& grid);

RuleFlags rule_flags(const RuleSet& rules);

}  // namespace baba
