#include <iostream>

#include "whim/cli.hpp"

int main(int argc, char** argv) {
  return whim::run_cli(argc, argv, std::cout, std::cerr);
}
