#include <exception>
#include <iostream>

#include "satctl/cli.hpp"

int main(int argc, char** argv) {
  try {
    return satctl::run_command(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 4;
  }
}
