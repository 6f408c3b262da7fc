#include <doctest.h>

#include <algorithm>

#include "baba/engine.hpp"
#include "baba/error.hpp"
#include "baba/level_text.hpp"
#include "baba/random.hpp"
#include "oracles.hpp"

using namespace baba;
using baba::testing::level;

namespace {

std::vector<Action> actions(std::string_view s) { return decode_solution(s); }

GameState play(const LevelGrid& grid, std::string_view moves) {
  GameState s = start_state(grid);
  for (Action a : actions(moves)) s = step(s, a);
  return s;
}

std::string rows_of(const GameState& s) {
  // Topmost sprite per cell; enough to compare simple positions.
  std::string out;
  for (int y = 0; y < s.grid.height(); ++y) {
    for (int x = 0; x < s.grid.width(); ++x) out.push_back(sprite_char(s.grid.top({x, y})));
    out.push_back('\n');
  }
  return out;
}

LevelGrid random_grid(Rng& rng, int w, int h) {
  LevelGrid g(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (rng.bernoulli(0.45)) g.set({x, y}, static_cast<Sprite>(1 + rng.index(kSpriteCount - 1)));
  return g;
}

}  // namespace

TEST_SUITE("sprites") {
  TEST_CASE("32 non-empty sprites split into 11 objects and 21 words") {
    int objects = 0, words = 0, nouns = 0, props = 0;
    for (Sprite s : all_sprites()) {
      if (s == Sprite::Empty) continue;
      const int kinds = is_object(s) + is_noun(s) + is_connector(s) + is_property(s);
      CHECK(kinds == 1);
      CHECK(is_word(s) == !is_object(s));
      objects += is_object(s);
      words += is_word(s);
      nouns += is_noun(s);
      props += is_property(s);
    }
    CHECK(objects == 11);
    CHECK(words == 21);
    CHECK(nouns == 11);
    CHECK(props == 9);
    CHECK(objects + words == 32);
  }

  TEST_CASE("noun and object mapping round-trips") {
    for (int c = 0; c < kObjectClassCount; ++c) {
      const Sprite obj = object_from_class(c);
      CHECK(object_of(noun_of(obj)) == obj);
    }
  }
}

TEST_SUITE("scan_rules") {
  TEST_CASE("BABA IS YOU reads left to right") {
    const RuleSet rules = scan_rules(level({"B12..", ".....", ".....", ".....", "....."}));
    CHECK(rules.rules() == std::set<Rule>{{Sprite::NounBaba, Sprite::You}});
  }

  TEST_CASE("reversed order forms nothing") {
    CHECK(scan_rules(level({"21B..", ".....", ".....", ".....", "....."})).empty());
    CHECK(scan_rules(level({"2....", "1....", "B....", ".....", "....."})).empty());
  }

  TEST_CASE("vertical and horizontal rules coexist") {
    // Windows enumerated by hand: only (0,0)->right and (4,1)->down hold NOUN IS X.
    const LevelGrid g = level({"B12..", "....F", "....1", "....3", "....."});
    const std::set<Rule> expected = {{Sprite::NounBaba, Sprite::You}, {Sprite::NounFlag, Sprite::Win}};
    CHECK(scan_rules(g).rules() == expected);
  }

  TEST_CASE("overlapping triples all count") {
    // Horizontal ROCK IS PUSH and vertical WALL IS PUSH share the PUSH word.
    const LevelGrid g = level({"..W..", "..1..", "R14..", ".....", "....."});
    const std::set<Rule> expected = {{Sprite::NounRock, Sprite::Push}, {Sprite::NounWall, Sprite::Push}};
    CHECK(scan_rules(g).rules() == expected);
  }

  TEST_CASE("stacked words each take part") {
    LevelGrid g = level({"B12..", ".....", ".....", ".....", "....."});
    g.place({2, 0}, Sprite::Win);
    const std::set<Rule> expected = {{Sprite::NounBaba, Sprite::You}, {Sprite::NounBaba, Sprite::Win}};
    CHECK(scan_rules(g).rules() == expected);
  }

  TEST_CASE("noun complements form transformation rules") {
    const RuleSet r = scan_rules(level({"R1F..", "K1K..", "W1R..", "W1K..", "....."}));
    CHECK(r.contains({Sprite::NounRock, Sprite::NounFlag}));
    CHECK(r.contains({Sprite::NounKeke, Sprite::NounKeke}));
    // keke is protected; wall gets the lowest target (keke < rock in sprite order).
    REQUIRE(r.transformations().size() == 2);
    CHECK(r.transformations()[0] == Transformation{class_index(Sprite::Rock), class_index(Sprite::Flag)});
    CHECK(r.transformations()[1] == Transformation{class_index(Sprite::Wall), class_index(Sprite::Keke)});
  }

  TEST_CASE("rule locality: object permutations leave rules alone") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      LevelGrid g = random_grid(rng, 8, 8);
      const RuleSet before = scan_rules(g);
      std::vector<Position> object_cells;
      std::vector<Sprite> objects;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          if (is_object(g.top({x, y})) || g.top({x, y}) == Sprite::Empty) {
            object_cells.push_back({x, y});
            objects.push_back(g.top({x, y}));
          }
      for (std::size_t i = objects.size(); i > 1; --i) std::swap(objects[i - 1], objects[rng.index(i)]);
      for (std::size_t i = 0; i < object_cells.size(); ++i) g.set(object_cells[i], objects[i]);
      CHECK(scan_rules(g) == before);
    }
  }
}

TEST_SUITE("rule_flags") {
  TEST_CASE("standard you and win rules set nothing") {
    const RuleSet r({{Sprite::NounBaba, Sprite::You}, {Sprite::NounFlag, Sprite::Win}});
    CHECK(rule_flags(r).bits.none());
  }

  TEST_CASE("two distinct YOU subjects set the multiple-you flag only") {
    const RuleSet r({{Sprite::NounBaba, Sprite::You}, {Sprite::NounKeke, Sprite::You}});
    RuleFlags expected;
    expected.set(RuleFlag::MultipleYou);
    CHECK(rule_flags(r) == expected);
  }

  TEST_CASE("reflexive and transform rules are distinguished") {
    CHECK(rule_flags(RuleSet({{Sprite::NounRock, Sprite::NounRock}})).to_uint() == 1u);
    CHECK(rule_flags(RuleSet({{Sprite::NounRock, Sprite::NounFlag}})).to_uint() == 2u);
  }

  TEST_CASE("each property maps to its slot") {
    const std::pair<Sprite, RuleFlag> cases[] = {
        {Sprite::Push, RuleFlag::Push}, {Sprite::Move, RuleFlag::Move}, {Sprite::Stop, RuleFlag::Stop},
        {Sprite::Kill, RuleFlag::Kill}, {Sprite::Sink, RuleFlag::Sink}};
    for (auto [word, flag] : cases) {
      const RuleFlags f = rule_flags(RuleSet({{Sprite::NounWall, word}}));
      CHECK(f.bits.count() == 1);
      CHECK(f.test(flag));
    }
  }

  TEST_CASE("HOT and MELT pair needs both, any subjects") {
    CHECK_FALSE(rule_flags(RuleSet({{Sprite::NounLava, Sprite::Hot}})).test(RuleFlag::HotMeltPair));
    CHECK_FALSE(rule_flags(RuleSet({{Sprite::NounBaba, Sprite::Melt}})).test(RuleFlag::HotMeltPair));
    CHECK(rule_flags(RuleSet({{Sprite::NounLava, Sprite::Hot}, {Sprite::NounBaba, Sprite::Melt}}))
              .test(RuleFlag::HotMeltPair));
  }
}

TEST_SUITE("movement") {
  TEST_CASE("move order runs against the direction of travel") {
    const auto right = process_move_order(Direction::Right, 3, 1);
    REQUIRE(right.size() == 3);
    CHECK(right[0] == Position{2, 0});
    CHECK(right[1] == Position{1, 0});
    CHECK(right[2] == Position{0, 0});
    const auto up = process_move_order(Direction::Up, 1, 3);
    CHECK(up.front() == Position{0, 0});
    const auto down = process_move_order(Direction::Down, 1, 3);
    CHECK(down.front() == Position{0, 2});
    const auto left = process_move_order(Direction::Left, 3, 1);
    CHECK(left.front() == Position{0, 0});
  }

  TEST_CASE("a row of players moves together without merging") {
    const GameState s = play(level({"B12.", "bb.."}), "R");
    CHECK(rows_of(s) == "B12.\n.bb.\n");
    CHECK(s.grid.at({1, 1}).size() == 1);
    CHECK(s.grid.at({2, 1}).size() == 1);
  }

  TEST_CASE("push chain shifts every pushable one cell") {
    const GameState s = play(level({"B12R14", "brr..."}), "R");
    CHECK(rows_of(s) == "B12R14\n.brr..\n");
  }

  TEST_CASE("chain against the border blocks everyone") {
    const GameState s = play(level({"B12R14", "...brr"}), "R");
    CHECK(rows_of(s) == "B12R14\n...brr\n");
  }

  TEST_CASE("STOP blocks, words are always pushable") {
    CHECK(rows_of(play(level({"B12W15", "bw...."}), "R")) == "B12W15\nbw....\n");
    CHECK(rows_of(play(level({"B12...", "b2...."}), "R")) == "B12...\n.b2...\n");
  }

  TEST_CASE("objects without rules are walked over") {
    const GameState s = play(level({"B12...", "br...."}), "R");
    CHECK(s.grid.at({1, 1}).size() == 2);
    CHECK(s.grid.top({1, 1}) == Sprite::Baba);
  }

  TEST_CASE("pushing a word out of its rule breaks it") {
    // Up from (1,2) pushes IS out of BABA IS YOU.
    const GameState s = play(level({".....", "B12..", ".b...", "....."}), "U");
    CHECK(s.grid.top({1, 0}) == Sprite::Is);
    CHECK(s.active_rules.empty());
    CHECK(s.status == Status::NoYou);
  }

  TEST_CASE("MOVE objects travel along their facing and bounce") {
    LevelGrid g = level({"K16...", "B12...", "b.....", "...k.."});
    GameState s = start_state(g);
    s = step(s, Action::Wait);
    CHECK(s.grid.top({4, 3}) == Sprite::Keke);
    s = step(s, Action::Wait);
    CHECK(s.grid.top({5, 3}) == Sprite::Keke);
    s = step(s, Action::Wait);  // blocked by the border, reverses and moves left
    CHECK(s.grid.top({4, 3}) == Sprite::Keke);
    CHECK(s.grid.at({4, 3}).front().facing == Direction::Left);
  }
}

TEST_SUITE("step") {
  const LevelGrid fig_a = level({"B12....", ".......", ".b...f.", ".......", "F13...."});
  const LevelGrid fig_b = level({"B12....", ".......", ".b...f.", "F......", ".13...."});

  TEST_CASE("walking onto the win object wins") {
    GameState s = start_state(fig_a);
    CHECK(s.status == Status::Playing);
    for (int i = 0; i < 3; ++i) {
      s = step(s, Action::Right);
      CHECK(s.status == Status::Playing);
    }
    s = step(s, Action::Right);
    CHECK(s.status == Status::Won);
    CHECK(s.turn == 4);
  }

  TEST_CASE("wait without movers only advances the turn") {
    const GameState s0 = start_state(fig_a);
    const GameState s1 = step(s0, Action::Wait);
    CHECK(s1.grid == s0.grid);
    CHECK(s1.turn == 1);
  }

  TEST_CASE("pushing the FLAG word completes FLAG IS WIN") {
    GameState s = start_state(fig_b);
    CHECK_FALSE(s.active_rules.contains({Sprite::NounFlag, Sprite::Win}));
    s = step(s, Action::Left);
    s = step(s, Action::Down);  // pushes FLAG from (0,3) to (0,4)
    CHECK(s.grid.top({0, 4}) == Sprite::NounFlag);
    CHECK(s.active_rules.contains({Sprite::NounFlag, Sprite::Win}));
    for (Action a : actions("URRRRR")) s = step(s, a);
    CHECK(s.status == Status::Won);
  }

  TEST_CASE("stepping a won state is rejected") {
    const GameState won = start_state(level({"B12..", "B13..", ".b...", ".....", "....."}));
    CHECK(won.status == Status::Won);
    CHECK_THROWS_AS(step(won, Action::Wait), Error);
  }

  TEST_CASE("no-you states may still be stepped") {
    const GameState s = start_state(level({"B1...", ".....", ".b...", ".....", "F13.f"}));
    CHECK(s.status == Status::NoYou);
    CHECK_NOTHROW(step(s, Action::Wait));
  }

  TEST_CASE("transformation replaces every instance, X IS X protects") {
    GameState s = start_state(level({"B12...", "R1F...", "b.r.r.", "F13..."}));
    s = step(s, Action::Wait);
    CHECK(s.grid.top({2, 2}) == Sprite::Flag);
    CHECK(s.grid.top({4, 2}) == Sprite::Flag);

    GameState p = start_state(level({"B12R1R", "R1F...", "b.r.r.", "F13..."}));
    p = step(p, Action::Wait);
    CHECK(p.grid.top({2, 2}) == Sprite::Rock);
  }

  TEST_CASE("transformations use pre-transformation classes") {
    // rock -> flag and flag -> rock swap in one step rather than chaining.
    GameState s = start_state(level({"R1F...", "F1R...", "rf....", "B12b.."}));
    s = step(s, Action::Wait);
    CHECK(s.grid.top({0, 2}) == Sprite::Flag);
    CHECK(s.grid.top({1, 2}) == Sprite::Rock);
  }

  TEST_CASE("SINK destroys itself and everything with it") {
    const GameState s = play(level({"A18...", "B12...", "ba....", "F13..f"}), "R");
    CHECK(s.grid.at({1, 2}).empty());
    CHECK(s.status == Status::NoYou);
  }

  TEST_CASE("a lone SINK object survives") {
    const GameState s = play(level({"A18...", "B12...", "b.a...", "F13..f"}), "W");
    CHECK(s.grid.top({2, 2}) == Sprite::Water);
  }

  TEST_CASE("KILL destroys the player only") {
    const GameState s = play(level({"S17...", "B12...", "bs....", "F13..f"}), "R");
    REQUIRE(s.grid.at({1, 2}).size() == 1);
    CHECK(s.grid.top({1, 2}) == Sprite::Skull);
  }

  TEST_CASE("HOT melts MELT objects") {
    const GameState s = play(level({"L19...", "B10...", "B12...", "bl....", "F13..f"}), "R");
    REQUIRE(s.grid.at({1, 3}).size() == 1);
    CHECK(s.grid.top({1, 3}) == Sprite::Lava);
  }

  TEST_CASE("HOT without MELT is harmless") {
    const GameState s = play(level({"L19...", "......", "B12...", "bl....", "F13..f"}), "R");
    CHECK(s.grid.at({1, 3}).size() == 2);
  }

  TEST_CASE("an object that is both YOU and WIN wins immediately") {
    const GameState s = start_state(level({"B12..", "B13..", "..b..", ".....", "....."}));
    CHECK(s.status == Status::Won);
  }
}

TEST_SUITE("replay") {
  const LevelGrid fig_a = level({"B12....", ".......", ".b...f.", ".......", "F13...."});

  TEST_CASE("shortest path wins with untracked rules") {
    const ReplayOutcome out = replay(fig_a, actions("RRRR"));
    CHECK(out.won);
    CHECK(out.steps_used == 4);
    CHECK(out.start_flags.bits.none());
    CHECK(out.end_flags.bits.none());
  }

  TEST_CASE("no actions, no win") {
    CHECK_FALSE(replay(fig_a, {}).won);
  }

  TEST_CASE("instant win with zero actions") {
    const ReplayOutcome out = replay(level({"B12..", ".....", "B13.b", ".....", "....."}), {});
    CHECK(out.won);
    CHECK(out.steps_used == 0);
  }

  TEST_CASE("end flags come from the winning state") {
    // Up pushes MOVE into KEKE IS MOVE, then baba walks round to the flag.
    const LevelGrid g = level({"K1.....", "..6....", "..b....", "B12....", "F13..f.", "......."});
    const ReplayOutcome out = replay(g, actions("URRRDDD"));
    CHECK(out.won);
    CHECK_FALSE(out.start_flags.test(RuleFlag::Move));
    CHECK(out.end_flags.test(RuleFlag::Move));
    CHECK(out.end_flags.bits.count() == 1);
  }

  TEST_CASE("replay budget is enforced") {
    std::vector<Action> many(kMaxReplayActions + 1, Action::Wait);
    CHECK_THROWS_AS(replay(fig_a, many), Error);
  }

  TEST_CASE("signature round-trips through a restored state") {
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
      GameState s = start_state(random_grid(rng, 6, 6));
      for (int k = 0; k < 5 && s.status != Status::Won; ++k) s = step(s, kAllActions[rng.index(5)]);
      const std::string sig = state_signature(s);
      const GameState restored = state_from_signature(sig, s.turn);
      CHECK(state_signature(restored) == sig);
      CHECK(restored.active_rules == s.active_rules);
    }
  }
}

TEST_SUITE("engine properties") {
  TEST_CASE("determinism, border safety and conservation on random play") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const int w = 5 + static_cast<int>(rng.index(6));
      const int h = 5 + static_cast<int>(rng.index(6));
      const LevelGrid g = random_grid(rng, w, h);
      std::vector<Action> moves;
      for (int k = 0; k < 20; ++k) moves.push_back(kAllActions[rng.index(5)]);

      GameState a = start_state(g);
      GameState b = start_state(g);
      for (Action m : moves) {
        if (a.status == Status::Won) break;
        const std::size_t before = a.grid.entity_count();
        a = step(a, m);
        b = step(b, m);
        CHECK(state_signature(a) == state_signature(b));
        CHECK(a.grid.entity_count() <= before);
        CHECK(a.grid.width() == w);
        CHECK(a.grid.height() == h);
      }
    }
  }
}
