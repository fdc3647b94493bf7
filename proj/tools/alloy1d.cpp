#include <iostream>
#include <string>
#include <vector>

#include "alloy1d/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return alloy1d::cli::run(args, std::cout, std::cerr);
}
