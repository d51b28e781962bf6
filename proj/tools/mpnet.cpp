#include <iostream>

#include "mpnet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mpnet::cli::run(args, std::cout, std::cerr);
}
