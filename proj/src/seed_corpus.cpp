#include "baba/store.hpp"

namespace baba {

const std::vector<NamedLevel>& seed_corpus() {
  static const std::vector<NamedLevel> corpus = {
      {"seed_01_walk",
       "B12....\n"
       ".......\n"
       ".b...f.\n"
       ".......\n"
       "F13....\n"},
      {"seed_02_push_word",
       "B12....\n"
       ".......\n"
       ".b...f.\n"
       "F......\n"
       ".13....\n"},
      {"seed_03_rocks",
       "B12.R14\n"
       ".......\n"
       ".b.r.f.\n"
       ".......\n"
       "F13....\n"},
      {"seed_04_walls",
       "B12W15.\n"
       ".......\n"
       ".b.w.f.\n"
       "...w...\n"
       "F13w...\n"},
      {"seed_05_two_players",
       "B12.K12\n"
       ".......\n"
       ".b...k.\n"
       ".......\n"
       "F13..f.\n"},
      {"seed_06_water",
       "A18....\n"
       "B12....\n"
       ".b.a.f.\n"
       "F13....\n"
       ".......\n"},
      {"seed_07_lava",
       "L19....\n"
       "B10....\n"
       "B12....\n"
       ".......\n"
       ".b.l.f.\n"
       "F13....\n"},
      {"seed_08_skull",
       "S17....\n"
       "B12....\n"
       ".......\n"
       ".b.s.f.\n"
       "...s...\n"
       "F13....\n"},
      {"seed_09_transform",
       "B12....\n"
       "R1F....\n"
       ".b.r...\n"
       ".......\n"
       "F13....\n"},
      {"seed_10_mover",
       "K16....\n"
       "B12....\n"
       ".b..k..\n"
       ".......\n"
       "F13..f.\n"},
  };
  return corpus;
}

}  // namespace baba
