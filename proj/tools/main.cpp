#include <exception>
#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv) {
  try {
    return gibbsmix::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
}
