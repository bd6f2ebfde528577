#include <iostream>
#include <string>
#include <vector>

#include "arxtrend/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  std::vector<std::string> args(argv + 1, argv + argc);
  arxtrend::cli::Context ctx{std::cin, std::cout, std::cerr};
  return arxtrend::cli::run(args, ctx);
}
