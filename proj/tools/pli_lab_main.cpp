#include <string>
#include <vector>

#include "plilab/experiments.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return plilab::cli::main_entry(args);
}
