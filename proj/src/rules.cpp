#include "baba/rules.hpp"

#include <map>

namespace baba {

std::string to_string(const Rule& rule) {
  std::string out(sprite_name(rule.subject));
  out += " IS ";
  out += sprite_name(rule.complement);
  return out;
}

RuleSet::RuleSet(std::set<Rule> rules) : rules_(std::move(rules)) {
  std::array<bool, kObjectClassCount> protected_class{};
  std::map<int, int> first_target;  // source class -> lowest target class
  for (const Rule& r : rules_) {
    const int subject = class_index(r.subject);
    if (is_property(r.complement)) {
      properties_[subject].set(static_cast<int>(property_of(r.complement)));
    } else if (r.complement == r.subject) {
      protected_class[subject] = true;
    } else {
      // std::set iterates complements in ascending order, so the first seen is lowest.
      first_target.try_emplace(subject, class_index(r.complement));
    }
  }
  for (const auto& [from, to] : first_target) {
    if (!protected_class[from]) transformations_.push_back({from, to});
  }
}

bool RuleSet::any_class_has(Property p) const {
  for (const PropertySet& s : properties_) {
    if (s.test(static_cast<int>(p))) return true;
  }
  return false;
}

std::string_view rule_flag_label(RuleFlag f) {
  switch (f) {
    case RuleFlag::Reflexive: return "X-IS-X";
    case RuleFlag::Transform: return "X-IS-Y";
    case RuleFlag::Push: return "X-IS-PUSH";
    case RuleFlag::Move: return "X-IS-MOVE";
    case RuleFlag::Stop: return "X-IS-STOP";
    case RuleFlag::Kill: return "X-IS-KILL";
    case RuleFlag::Sink: return "X-IS-SINK";
    case RuleFlag::HotMeltPair: return "X-IS-HOT & X-IS-MELT";
    case RuleFlag::MultipleYou: return "X,Y-IS-YOU";
  }
  return "?";
}

namespace {

void scan_line(const LevelGrid& grid, Position a, Direction d, std::set<Rule>& out) {
  const Position b = step_towards(a, d);
  const Position c = step_towards(b, d);
  if (!grid.in_bounds(c)) return;

  bool has_connector = false;
  for (const Entity& e : grid.at(b)) has_connector |= is_connector(e.sprite);
  if (!has_connector) return;

  for (const Entity& subject : grid.at(a)) {
    if (!is_noun(subject.sprite)) continue;
    for (const Entity& complement : grid.at(c)) {
      if (is_noun(complement.sprite) || is_property(complement.sprite)) {
        out.insert(Rule{subject.sprite, complement.sprite});
      }
    }
  }
}

}  // namespace

RuleSet scan_rules(const LevelGrid& grid) {
  std::set<Rule> rules;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      scan_line(grid, {x, y}, Direction::Right, rules);
      scan_line(grid, {x, y}, Direction::Down, rules);
    }
  }
  return RuleSet(std::move(rules));
}

RuleFlags rule_flags(const RuleSet& rules) {
  RuleFlags flags;
  bool hot = false;
  bool melt = false;
  std::set<Sprite> you_subjects;
  for (const Rule& r : rules.rules()) {
    if (is_noun(r.complement)) {
      flags.set(r.complement == r.subject ? RuleFlag::Reflexive : RuleFlag::Transform);
      continue;
    }
    switch (property_of(r.complement)) {
      case Property::Push: flags.set(RuleFlag::Push); break;
      case Property::Move: flags.set(RuleFlag::Move); break;
      case Property::Stop: flags.set(RuleFlag::Stop); break;
      case Property::Kill: flags.set(RuleFlag::Kill); break;
      case Property::Sink: flags.set(RuleFlag::Sink); break;
      case Property::Hot: hot = true; break;
      case Property::Melt: melt = true; break;
      case Property::You: you_subjects.insert(r.subject); break;
      case Property::Win: break;
    }
  }
  flags.set(RuleFlag::HotMeltPair, hot && melt);
  flags.set(RuleFlag::MultipleYou, you_subjects.size() >= 2);
  return flags;
}

}  // namespace baba
