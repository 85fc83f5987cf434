#include <iostream>

#include "rateless/cli/commands.hpp"

int main(int argc, char** argv) { return rateless::cli::run_app(argc, argv, std::cout, std::cerr); }
