#include <iostream>

#include "icluster/cli.hpp"

int main(int argc, char** argv) {
  return icluster::cli::run(argc, argv, std::cout, std::cerr);
}
