#include <iostream>

#include "prepost/cli.hpp"

int main(int argc, char** argv) { return prepost::run_cli(argc, argv, std::cout, std::cerr); }
