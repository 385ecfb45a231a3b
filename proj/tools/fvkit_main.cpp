#include <iostream>
#include <string>
#include <vector>

#include "fvkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fvkit::run_cli(args, std::cout, std::cerr);
}
