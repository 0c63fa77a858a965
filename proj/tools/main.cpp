#include <exception>
#include <iostream>

#include "blockspec/cli.hpp"

int main(int argc, char** argv) {
  try {
    return blockspec::cli::run(argc, argv, std::cout, std::cerr, std::cin);
  } catch (const std::exception& e) {
    std::cerr << "internal failure: " << e.what() << "\n";
    return 1;
  }
}
