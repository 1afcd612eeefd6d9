#include <CLI11.hpp>

#include "fadecv/fadecv.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fadecv: entanglement and key rates of Gaussian states over fading channels"};
  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  return 0;
}
