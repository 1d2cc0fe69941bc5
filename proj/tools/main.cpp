#include <iostream>
#include <string>
#include <vector>

#include "ordibound/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return ordibound::run_command(args, std::cout, std::cerr);
}
