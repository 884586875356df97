#include <iostream>

#include "layerprop/cli.hpp"

int main(int argc, char** argv) {
  const auto res = layerprop::cli::run(std::vector<std::string>(argv + 1, argv + argc));
  std::cout << res.out;
  std::cerr << res.err;
  return res.code;
}
