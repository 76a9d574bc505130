#include <fibdescent/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return fibdescent::cli::run(argc, argv, std::cout, std::cerr); }
