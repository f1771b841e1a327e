#include <iostream>

#include "apxne/cli.hpp"

int main(int argc, char** argv) {
  return apxne::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
