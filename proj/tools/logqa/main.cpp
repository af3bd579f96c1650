#include <iostream>

#include "logqa/cli.hpp"

int main(int argc, char** argv) {
  return logqa::run_cli({argv + 1, argv + argc}, std::cout, std::cerr, std::cin);
}
