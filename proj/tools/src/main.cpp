#include <iostream>
#include <string>
#include <vector>

#include "race_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return race::cli::run(args, std::cout, std::cerr);
}
