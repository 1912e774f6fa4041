#include <iostream>
#include <string>
#include <vector>

#include "stmcheck/driver.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stmcheck::run_cli(args, std::cout, std::cerr);
}
