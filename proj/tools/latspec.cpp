#include <iostream>

#include "latspec/cli.hpp"

int main(int argc, char** argv) {
  return latspec::cli::run(argc, argv, std::cout, std::cerr);
}
