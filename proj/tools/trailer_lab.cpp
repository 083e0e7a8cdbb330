#include <iostream>

#include "trailer_lab/cli.hpp"

int main(int argc, char** argv) {
  return trailer_lab::cli::run(argc, argv, std::cout, std::cerr);
}
