#include <iostream>

#include "aerodesign/cli.hpp"

int main(int argc, char** argv) { return aerodesign::run_cli(argc, argv, std::cout, std::cerr); }
