#include <iostream>

#include "metfa/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return metfa::cli::run(args, std::cout, std::cerr, metfa::cli::environment_from_process());
}
