#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"
#include "hdgap/log.hpp"

int main(int argc, char** argv) {
  hdgap::log::set_level(hdgap::log::Level::error);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
