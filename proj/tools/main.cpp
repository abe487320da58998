#include <iostream>

#include "tvparcor/cli.hpp"

int main(int argc, char** argv) {
  return tvparcor::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
