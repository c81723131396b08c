#include <iostream>

#include "qsdc/cli.hpp"

int main(int argc, char** argv) { return qsdc::run_cli(argc, argv, std::cout, std::cerr); }
