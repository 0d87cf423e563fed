#include <string>
#include <vector>

#include "twoscale/cli.hpp"

int main(int argc, char** argv) {
  return twoscale::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
