#include <iostream>
#include <string>
#include <vector>

#include "qkm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qkm::run_cli(args, std::cout, std::cerr);
}
