#include <csignal>
#include <iostream>

#include "pccseg/cli.hpp"

int main(int argc, char** argv) {
  std::signal(SIGINT, [](int) { pccseg::cli::request_shutdown(); });
  std::signal(SIGTERM, [](int) { pccseg::cli::request_shutdown(); });
  return pccseg::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
