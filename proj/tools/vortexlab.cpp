#include <string>
#include <vector>

#include "vortexlab/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return vortexlab::run_command(args);
}
