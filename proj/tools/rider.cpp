#include <iostream>

#include "rider/app/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rider::app::run_cli(args, std::cout, std::cerr);
}
