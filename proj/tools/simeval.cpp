#include <iostream>
#include <string>
#include <vector>

#include "simeval/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return simeval::cli::run(args, std::cout, std::cerr);
}
