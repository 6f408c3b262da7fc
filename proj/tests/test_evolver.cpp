#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "baba/error.hpp"
#include "baba/evolver.hpp"
#include "baba/level_text.hpp"
#include "baba/store.hpp"
#include "oracles.hpp"

using namespace baba;
using baba::testing::level;

namespace {

// Windows keyed by their row-major characters, read straight off the text.
std::map<std::string, long> window_counts(const std::vector<std::string>& rows) {
  std::map<std::string, long> out;
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  for (int y = 0; y + 3 <= h; ++y) {
    for (int x = 0; x + 3 <= w; ++x) {
      std::string key;
      for (int dy = 0; dy < 3; ++dy) key += rows[y + dy].substr(x, 3);
      ++out[key];
    }
  }
  return out;
}

std::map<std::string, long> as_text(const PatternDistribution& d) {
  std::map<std::string, long> out;
  for (const auto& [key, count] : d.counts) {
    std::string s;
    for (Sprite sp : key) s += sprite_char(sp);
    out[s] = count;
  }
  return out;
}

PatternKey uniform_key(Sprite s) {
  PatternKey k;
  k.fill(s);
  return k;
}

std::vector<LevelGrid> first_seeds(int n) {
  std::vector<LevelGrid> out;
  for (int i = 0; i < n; ++i) out.push_back(decode_level(seed_corpus()[i].text));
  return out;
}

}  // namespace

TEST_SUITE("patterns") {
  TEST_CASE("window count is (w-2)(h-2)") {
    for (auto [w, h] : {std::pair{3, 3}, {5, 5}, {7, 4}, {20, 20}}) {
      const PatternDistribution d = extract_patterns(LevelGrid(w, h));
      CHECK(d.total == (w - 2) * (h - 2));
      CHECK(d.counts.size() == 1);
    }
  }

  TEST_CASE("matches direct enumeration of the level text") {
    for (const NamedLevel& seed : seed_corpus()) {
      CAPTURE(seed.name);
      std::vector<std::string> rows;
      std::string row;
      for (char c : seed.text) {
        if (c == '\n') {
          rows.push_back(row);
          row.clear();
        } else {
          row += c;
        }
      }
      CHECK(as_text(extract_patterns(decode_level(seed.text))) == window_counts(rows));
    }
  }

  TEST_CASE("stacks flatten to the topmost sprite") {
    LevelGrid g(3, 3);
    g.place({1, 1}, Sprite::Flag);
    g.place({1, 1}, Sprite::Baba);
    const PatternDistribution d = extract_patterns(g);
    REQUIRE(d.counts.size() == 1);
    CHECK(d.counts.begin()->first[4] == Sprite::Baba);
  }

  TEST_CASE("too small for a window") {
    CHECK_THROWS_AS(extract_patterns(LevelGrid(2, 5)), Error);
  }
}

TEST_SUITE("kl divergence") {
  TEST_CASE("identical distributions give zero") {
    const PatternDistribution d = extract_patterns(decode_level(seed_corpus()[2].text));
    CHECK(kl_divergence(d, d, 1e-6) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("disjoint single-pattern distributions, closed form") {
    PatternDistribution p, q;
    p.counts[uniform_key(Sprite::Wall)] = 1;
    p.total = 1;
    q.counts[uniform_key(Sprite::Rock)] = 1;
    q.total = 1;
    for (double eps : {1e-6, 1e-3, 0.5}) {
      // Union has two patterns; each side puts (1+eps)/(1+2eps) on its own.
      const double hi = (1 + eps) / (1 + 2 * eps);
      const double lo = eps / (1 + 2 * eps);
      const double one_way = hi * std::log(hi / lo) + lo * std::log(lo / hi);
      const double expected = 0.5 * one_way + 0.5 * one_way;
      CHECK(std::abs(kl_divergence(p, q, eps) - expected) < 1e-12);
    }
  }

  TEST_CASE("overlapping distributions, closed form") {
    PatternDistribution p, q;
    p.counts[uniform_key(Sprite::Wall)] = 3;
    p.counts[uniform_key(Sprite::Rock)] = 1;
    p.total = 4;
    q.counts[uniform_key(Sprite::Wall)] = 1;
    q.counts[uniform_key(Sprite::Rock)] = 1;
    q.counts[uniform_key(Sprite::Empty)] = 2;
    q.total = 4;
    const double eps = 1e-6;
    const double zp = 4 + 3 * eps;
    const double zq = 4 + 3 * eps;
    const double pw = (3 + eps) / zp, pr = (1 + eps) / zp, pe = eps / zp;
    const double qw = (1 + eps) / zq, qr = (1 + eps) / zq, qe = (2 + eps) / zq;
    const double pq = pw * std::log(pw / qw) + pr * std::log(pr / qr) + pe * std::log(pe / qe);
    const double qp = qw * std::log(qw / pw) + qr * std::log(qr / pr) + qe * std::log(qe / pe);
    CHECK(std::abs(kl_divergence(p, q, eps) - 0.5 * (pq + qp)) < 1e-12);
    CHECK(kl_divergence(p, q, eps) == kl_divergence(q, p, eps));
  }

  TEST_CASE("bad inputs") {
    PatternDistribution empty;
    PatternDistribution one;
    one.counts[uniform_key(Sprite::Wall)] = 1;
    one.total = 1;
    CHECK_THROWS_AS(kl_divergence(empty, one, 1e-6), Error);
    CHECK_THROWS_AS(kl_divergence(one, one, 0.0), Error);
  }
}

TEST_SUITE("fitness terms") {
  TEST_CASE("unnecessary ratio counts objects without a noun") {
    // Two baba objects with no BABA word, one rock with a ROCK word.
    const LevelGrid g = level({"b.b..", "r....", "R....", ".....", "....."});
    CHECK(unnecessary_ratio(g) == doctest::Approx(2.0 / 3.0));
    CHECK(unnecessary_ratio(level({"B....", ".....", ".....", ".....", "....."})) == 0.0);
  }

  TEST_CASE("playability needs a YOU rule and a WIN word") {
    CHECK(playability_flag(level({"B12..", "....3", ".....", ".....", "....."})) == 1);
    CHECK(playability_flag(level({"B12..", ".....", ".....", ".....", "....."})) == 0);
    CHECK(playability_flag(level({"B1.2.", "....3", ".....", ".....", "....."})) == 0);
    CHECK(playability_flag(level({"B", "1", "2", "3", "."})) == 1);
  }

  TEST_CASE("emptiness ratio") {
    CHECK(emptiness_ratio(LevelGrid(5, 5)) == 1.0);
    CHECK(emptiness_ratio(level({"b....", ".....", ".....", ".....", "....f"})) == doctest::Approx(23.0 / 25.0));
  }

  TEST_CASE("fitness against itself is the penalty terms only") {
    for (const NamedLevel& seed : seed_corpus()) {
      const LevelGrid g = decode_level(seed.text);
      const std::vector<LevelGrid> refs{g};
      const double expected =
          unnecessary_ratio(g) + (1 - playability_flag(g)) + 0.1 * emptiness_ratio(g);
      CHECK(std::abs(fitness(g, refs, EvolverParams{}) - expected) < 1e-12);
    }
  }

  TEST_CASE("fitness takes the closest reference") {
    const std::vector<LevelGrid> refs = first_seeds(4);
    const LevelGrid cand = refs[3];
    const EvolverParams params;
    double best = INFINITY;
    for (const LevelGrid& r : refs) {
      best = std::min(best, kl_divergence(extract_patterns(r), extract_patterns(cand), params.epsilon));
    }
    CHECK(best == 0.0);
    CHECK(fitness(cand, refs, params) == doctest::Approx(fitness(cand, std::vector{cand}, params)));
  }
}

TEST_SUITE("evolver") {
  TEST_CASE("parameter validation") {
    EvolverParams p;
    p.mutation_rate = 0.5;
    CHECK_THROWS_AS(validate(p), Error);
    p = {};
    p.pattern_paste_prob = 1.5;
    CHECK_THROWS_AS(validate(p), Error);
    p = {};
    p.epsilon = 0;
    CHECK_THROWS_AS(validate(p), Error);
    CHECK_NOTHROW(validate(EvolverParams{}));
  }

  TEST_CASE("init mode names round-trip") {
    for (InitMode m : {InitMode::RandomMarginal, InitMode::CopyReference, InitMode::FromEditor}) {
      CHECK(parse_init_mode(init_mode_name(m)) == m);
    }
    CHECK_FALSE(parse_init_mode("bogus"));
  }

  TEST_CASE("mutation without pasting changes at most the sampled cells") {
    const ReferenceSet refs(first_seeds(3));
    EvolverParams params;
    params.mutation_rate = 1.0;  // exactly one resampled cell
    params.pattern_paste_prob = 0.0;
    Rng rng(7);
    const LevelGrid base = refs.levels()[0];
    for (int i = 0; i < 200; ++i) {
      const LevelGrid child = mutate(base, refs, params, rng);
      int diff = 0;
      for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) diff += !(base.at({x, y}) == child.at({x, y}));
      CHECK(diff <= 1);
    }
  }

  TEST_CASE("pasting always stamps a reference window") {
    const ReferenceSet refs(first_seeds(3));
    for (const LevelGrid& r : refs.levels()) {
      for (const Stack& st : r.cells()) REQUIRE((st.empty() || st.back().sprite != Sprite::Floor));
    }
    EvolverParams params;
    params.mutation_rate = 1.0;
    params.pattern_paste_prob = 1.0;
    Rng rng(11);
    LevelGrid base(9, 9);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) base.set({x, y}, Sprite::Floor);
    for (int i = 0; i < 50; ++i) {
      const LevelGrid child = mutate(base, refs, params, rng);
      // A floor-free window can only come from a reference.
      bool found = false;
      for (int ay = 0; ay + 3 <= 9 && !found; ++ay) {
        for (int ax = 0; ax + 3 <= 9 && !found; ++ax) {
          PatternKey key;
          bool clean = true;
          for (int k = 0; k < 9; ++k) {
            key[k] = child.top({ax + k % 3, ay + k / 3});
            clean &= key[k] != Sprite::Floor;
          }
          if (!clean) continue;
          for (const PatternDistribution& d : refs.distributions()) found |= d.counts.count(key) > 0;
        }
      }
      CHECK(found);
    }
  }

  TEST_CASE("best fitness never increases and runs are reproducible") {
    const std::vector<LevelGrid> refs = first_seeds(5);
    for (InitMode mode : {InitMode::RandomMarginal, InitMode::CopyReference}) {
      EvolverParams params;
      params.init_mode = mode;
      params.max_iterations = 60;
      const EvolverState a = run(init_evolver({refs, 99}, params), params);
      const EvolverState b = run(init_evolver({refs, 99}, params), params);
      REQUIRE(a.trace.size() == 61);
      for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] <= a.trace[i - 1]);
      CHECK(a.trace == b.trace);
      CHECK(a.best().grid == b.best().grid);
    }
  }

  TEST_CASE("from-editor starts from the given grid") {
    EvolverParams params;
    params.init_mode = InitMode::FromEditor;
    const LevelGrid editor = decode_level(seed_corpus()[4].text);
    const EvolverState s = init_evolver({first_seeds(3), 1, editor}, params);
    CHECK(s.population[0].grid == editor);
    CHECK(s.population[1].grid == editor);
    CHECK_THROWS_AS(init_evolver({first_seeds(3), 1}, params), Error);
  }

  TEST_CASE("paused state refuses to step and run stops at target") {
    EvolverParams params;
    EvolverState s = init_evolver({first_seeds(3), 5}, params);
    s.paused = true;
    CHECK_THROWS_AS(evolve_step(s, params), Error);
    CHECK(run(s, params).iteration == 0);
    s.paused = false;
    params.target_fitness = 1e9;
    CHECK(run(s, params).iteration == 0);
  }

  TEST_CASE("golden trace for a fixed seed") {
    EvolverParams params;
    params.max_iterations = 50;
    const EvolverState s = run(init_evolver({first_seeds(3), 20261015}, params), params);
    REQUIRE(s.trace.size() == 51);
    const std::map<int, double> golden = {{0, 15.550722022234009},  {10, 11.844330984368629},
                                          {20, 8.4568514656447249},  {30, 7.5329619167248936},
                                          {40, 7.5301047738677509},  {50, 7.5301047738677509}};
    for (const auto& [i, v] : golden) CHECK(std::abs(s.trace[i] - v) < 1e-9);
    CHECK(encode_level(s.best().grid) == "112.f..\nf......\n.b.....\n.......\nF13...1\n");
  }
}

TEST_SUITE("evolver fixtures") {
  // Fully dense, playable, and every object class has its noun on the map.
  const std::initializer_list<std::string_view> kDense = {"B12bf", "F13fb", "bfbfb", "fbfbf", "bfbfb"};

  TEST_CASE("uniform grid has one pattern; one wall in 4x6 matches enumeration") {
    const PatternDistribution d = extract_patterns(LevelGrid(5, 5));
    CHECK(d.counts.size() == 1);
    CHECK(d.counts.begin()->second == 9);
    const std::vector<std::string> rows = {"....", "....", ".w..", "....", "....", "...."};
    LevelGrid g(4, 6);
    g.place({1, 2}, Sprite::Wall);
    CHECK(as_text(extract_patterns(g)) == window_counts(rows));
    CHECK(extract_patterns(g).total == 8);
  }

  TEST_CASE("hand-counted u and s") {
    // Four objects, the keke has no KEKE word.
    const LevelGrid g = level({"B12..", "F13..", "b.f..", "k...f", "....."});
    CHECK(unnecessary_ratio(g) == 0.25);
    CHECK(unnecessary_ratio(LevelGrid(5, 5)) == 0.0);
    CHECK(emptiness_ratio(level({"b....", "f....", "r....", "k....", "w...."})) == 0.8);
    CHECK(emptiness_ratio(level(kDense)) == 0.0);
  }

  TEST_CASE("dense playable reference copy has zero fitness") {
    const LevelGrid g = level(kDense);
    REQUIRE(playability_flag(g) == 1);
    const std::vector<LevelGrid> refs{g, decode_level(seed_corpus()[0].text)};
    CHECK(fitness(g, refs, EvolverParams{}) == 0.0);
  }

  TEST_CASE("removing the WIN word costs the playability term") {
    const LevelGrid with = level(kDense);
    LevelGrid without = with;
    without.set({2, 1}, Sprite::Flag);
    REQUIRE(playability_flag(without) == 0);
    const std::vector<LevelGrid> refs{with};
    const EvolverParams params;
    const double kl = kl_divergence(extract_patterns(with), extract_patterns(without), params.epsilon);
    const double expected = kl + unnecessary_ratio(without) + 1.0 + 0.1 * emptiness_ratio(without);
    CHECK(std::abs(fitness(without, refs, params) - expected) < 1e-12);
    CHECK(fitness(without, refs, params) - fitness(with, refs, params) > 1.0);
  }

  TEST_CASE("copy-reference with target 0 stops immediately") {
    EvolverParams params;
    params.init_mode = InitMode::CopyReference;
    params.target_fitness = 0.0;
    params.max_iterations = 100;
    const EvolverState s = run(init_evolver({{level(kDense)}, 3}, params), params);
    CHECK(s.iteration <= 1);
    CHECK(s.best().fitness == 0.0);
  }

  TEST_CASE("zero iterations returns the initial state") {
    EvolverParams params;
    params.max_iterations = 0;
    const EvolverState init = init_evolver({first_seeds(2), 8}, params);
    const EvolverState s = run(init, params);
    CHECK(s.iteration == 0);
    CHECK(s.population[0].grid == init.population[0].grid);
    CHECK(s.trace.size() == 1);
  }

  TEST_CASE("fitness is non-negative and zero only when playable") {
    const ReferenceSet refs(first_seeds(5));
    Rng rng(17);
    EvolverParams params;
    params.mutation_rate = 6;
    LevelGrid g = refs.levels()[2];
    for (int i = 0; i < 200; ++i) {
      g = mutate(g, refs, params, rng);
      const double f = fitness(g, refs, params);
      CHECK(f >= 0.0);
      if (f == 0.0) CHECK(playability_flag(g) == 1);
    }
  }
}
