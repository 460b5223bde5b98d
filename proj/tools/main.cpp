#include <iostream>
#include <string>
#include <vector>

#include "hpl/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return hpl::cli::run(args, std::cout, std::cerr);
}
