#include <iostream>

#include "marginforge/cli.hpp"

int main(int argc, char** argv) { return marginforge::run_cli(argc, argv, std::cout, std::cerr); }
