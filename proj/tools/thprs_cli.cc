#include <iostream>

#include "thprs/experiment.h"

int main(int argc, char** argv) {
  return thprs::RunCli(argc, argv, std::cout, std::cerr);
}
