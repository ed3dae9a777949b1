#include <string>
#include <vector>

#include "germeval/cli.hpp"

int main(int argc, char** argv) {
  return germeval::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
