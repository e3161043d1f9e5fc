#include "t2motion/cli.hpp"

#include <iostream>
#include <string>
#include <vector>

int main(int argc, char **argv) {
  std::vector<std::string> const args(argv + 1, argv + argc);
  return t2motion::cli::run(args, std::cout, std::cerr);
}
