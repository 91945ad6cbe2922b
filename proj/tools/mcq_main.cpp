#include <string>
#include <vector>

#include "mcq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mcq::cli::run(args);
}
