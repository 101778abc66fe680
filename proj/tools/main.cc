#include <iostream>
#include <string>
#include <vector>

#include "hsdp/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return hsdp::RunCli(args, std::cout, std::cerr);
}
