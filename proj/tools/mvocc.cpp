#include "mvocc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mvocc::run_cli(argc, argv, std::cout, std::cerr); }
