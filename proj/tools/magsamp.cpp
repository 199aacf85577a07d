#include <iostream>
#include <locale>

#include "magsamp/cli.hpp"

int main(int argc, char** argv) {
  std::locale::global(std::locale::classic());
  return magsamp::cli::run(argc, argv, std::cout, std::cerr);
}
