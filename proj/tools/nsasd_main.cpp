#include <iostream>

#include "nsasd/cli.hpp"

int main(int argc, char** argv) {
  return nsasd::run_cli(argc, argv, std::cout, std::cerr);
}
