#include <iostream>

#include "timestitch/cli.hpp"

int main(int argc, char** argv) {
  return timestitch::cli::run_cli(argc, argv, std::cout, std::cerr);
}
