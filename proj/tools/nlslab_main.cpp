// Command-line entry point; all logic lives in nlslab::dispatch.

#include <iostream>
#include <string>
#include <vector>

#include "nlslab/nlslab.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nlslab::dispatch(std::move(args), std::cout, std::cerr);
}
