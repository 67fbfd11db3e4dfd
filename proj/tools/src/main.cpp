#include <iostream>

#include "tirefit_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tirefit::cli::run(args, std::cout, std::cerr);
}
