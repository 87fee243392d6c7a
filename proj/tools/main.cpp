#include "polymrf/experiment.hpp"

#include <iostream>

int main(int argc, char** argv)
{
  return polymrf::run_cli(argc, argv, std::cout, std::cerr);
}
