#include <iostream>
#include <string>
#include <vector>

#include "cdslab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cdslab::run_cli(args, std::cout, std::cerr);
}
