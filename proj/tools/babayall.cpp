#include <iostream>

#include "baba/cli.hpp"

int main(int argc, char** argv) {
  return baba::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
