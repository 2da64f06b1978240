#include <dfw/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return dfw::run_cli(argc, argv, std::cout, std::cerr); }
