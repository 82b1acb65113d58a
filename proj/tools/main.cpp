#include <iostream>

#include "agentlab/cli/cli.hpp"

int main(int argc, char** argv) {
  return agentlab::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
